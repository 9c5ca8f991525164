#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carleson/criteria.hpp"
#include "carleson/dsl/expression.hpp"
#include "carleson/measure.hpp"
#include "carleson/space.hpp"

namespace carleson::dsl {

/// gamma or v: one formula in n, or an explicit list.
struct SequenceSpec {
  bool is_list = false;
  std::vector<ExprPtr> items;
  SourcePos pos;
};

struct ComponentDecl {
  enum class Kind { atom, atoms, circle, radial };

  struct Field {
    std::string key;
    ExprPtr value;
  };

  Kind kind = Kind::atom;
  long n_lo = 0;  ///< index range, atoms only
  long n_hi = -1;
  std::vector<Field> fields;  ///< canonical key order for the kind
  SourcePos pos;

  const Field* find(std::string_view key) const;
  Field* find(std::string_view key);
};

const char* to_string(ComponentDecl::Kind kind);

/// Keys each component kind expects, in canonical order.
const std::vector<std::string>& component_keys(ComponentDecl::Kind kind);

struct InstanceOptions {
  std::optional<long> truncate;
  std::optional<double> tol;
  std::optional<long> window;
  std::optional<long> discretize;
  std::optional<bool> tail_monotone;
};

struct InstanceFile {
  SequenceSpec gamma;
  SequenceSpec weights;
  std::vector<ComponentDecl> measure;
  InstanceOptions options;
};

InstanceFile parse_instance(std::string_view text);

/// Canonical text form; parse(print(f)) is structurally equal to f.
std::string print(const InstanceFile& file);

bool structurally_equal(const InstanceFile& a, const InstanceFile& b);

/// Command-line values take precedence over the [options] section.
struct Overrides {
  std::optional<long> truncate;
  std::optional<double> tol;
  std::optional<long> window;
  std::optional<long> discretize;
};

struct Settings {
  Index size = 64;
  double tol = 1e-10;
  Index window = 0;  ///< 0 selects the default
  int discretize = 64;
  bool tail_monotone = false;

  CriteriaOptions criteria() const;
};

struct Instance {
  SpacePair<double> space;
  Measure<double> measure;
  Settings settings;
};

constexpr long default_truncation = 64;

Settings resolve_settings(const InstanceFile& file, const Overrides& overrides = {});

/// Evaluates the expressions and assembles the space and the measure. Throws
/// EvalError or InvalidInstance.
Instance build(const InstanceFile& file, const Overrides& overrides = {});

}  // namespace carleson::dsl
