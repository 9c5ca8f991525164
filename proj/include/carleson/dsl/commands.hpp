#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carleson/criteria.hpp"
#include "carleson/dsl/instance.hpp"
#include "carleson/dsl/json_writer.hpp"
#include "carleson/oracle.hpp"

namespace carleson::dsl {

enum ExitCode : int { exit_ok = 0, exit_parse = 1, exit_invalid = 2, exit_numerical = 3 };

const std::vector<std::string>& command_names();

struct RunFlags {
  Overrides overrides;
  bool strict = false;
  std::optional<std::string> out;    ///< write the report here instead of stdout
  std::optional<std::string> sweep;  ///< param=start:step:end
};

/// One swept parameter: an option name (truncate, tol, window, discretize) or
/// a measure field "m<k>.<key>" with k counted from 1 in declaration order.
struct SweepSpec {
  std::string param;
  std::vector<double> values;
};

SweepSpec parse_sweep(std::string_view text);

/// Returns a copy of `file` with the parameter set to `value`, together with
/// the overrides it implies.
InstanceFile apply_sweep(const InstanceFile& file, Overrides& overrides, std::string_view param, double value);

Json hypotheses_json(const Instance& instance);
Json certificate_json(const Certificate<double>& cert);
Json hs_json(const HSReport<double>& hs);
Json spectral_json(const SpectralSummary<double>& s);
Json consistency_json(const ConsistencyRecord& r);
Json meta_json(const std::string& command, const Settings& settings);

/// Runs a command on instance text. Reports go to `out` (or flags.out),
/// diagnostics to `err`. Returns the process exit code.
int run(const std::string& command, std::string_view instance_text, const RunFlags& flags, std::ostream& out,
        std::ostream& err);

/// As run(), reading the instance from a file ("-" for standard input).
int run_file(const std::string& command, const std::string& path, const RunFlags& flags, std::ostream& out,
             std::ostream& err);

}  // namespace carleson::dsl
