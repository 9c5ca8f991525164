#include "carleson/dsl/instance.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace carleson::dsl {

namespace {

using Kind = ComponentDecl::Kind;

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_blank(char c) { return c == ' ' || c == '\t'; }

/// One source line with comments stripped; columns refer to the original text.
struct Line {
  std::string_view text;
  int number = 0;

  SourcePos at(std::size_t i) const { return {number, static_cast<int>(i) + 1}; }
  [[noreturn]] void fail(std::size_t i, const std::string& message) const { throw ParseError(at(i), message); }
};

std::size_t skip_blank(std::string_view s, std::size_t i) {
  while (i < s.size() && is_blank(s[i])) ++i;
  return i;
}

std::size_t trim_right(std::string_view s, std::size_t end) {
  while (end > 0 && is_blank(s[end - 1])) --end;
  return end;
}

template <typename T>
std::optional<T> parse_literal(std::string_view s) {
  T value{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size()) return std::nullopt;
  return value;
}

struct KeyValue {
  std::string key;
  std::size_t key_col = 0;
  std::size_t value_begin = 0;
  std::size_t value_end = 0;
};

/// Splits "k1=v1 k2=v2 ..." starting at `from`. A value runs up to the key of
/// the next '=', so values may contain spaces.
std::vector<KeyValue> split_fields(const Line& line, std::size_t from) {
  const std::string_view s = line.text;
  std::vector<KeyValue> out;
  for (std::size_t eq = s.find('=', from); eq != std::string_view::npos; eq = s.find('=', eq + 1)) {
    const std::size_t name_end = trim_right(s, eq);
    std::size_t name_begin = name_end;
    while (name_begin > from && is_ident_char(s[name_begin - 1])) --name_begin;
    if (name_begin == name_end) line.fail(eq, "expected a key before '='");
    if (!out.empty()) {
      out.back().value_end = trim_right(s, name_begin);
      if (name_begin > 0 && !is_blank(s[name_begin - 1])) line.fail(name_begin, "expected whitespace before key");
    } else if (skip_blank(s, from) != name_begin) {
      line.fail(skip_blank(s, from), "expected key=value");
    }
    out.push_back({std::string(s.substr(name_begin, name_end - name_begin)), name_begin, skip_blank(s, eq + 1), 0});
  }
  if (!out.empty()) out.back().value_end = trim_right(s, s.size());
  for (const auto& kv : out)
    if (kv.value_begin >= kv.value_end) line.fail(kv.value_begin, "missing value for '" + kv.key + "'");
  if (out.empty() && skip_blank(s, from) < s.size()) line.fail(skip_blank(s, from), "expected key=value");
  return out;
}

ExprPtr expression_at(const Line& line, std::size_t begin, std::size_t end) {
  return parse_expression(line.text.substr(begin, end - begin), line.at(begin));
}

SequenceSpec parse_sequence(const Line& line, const KeyValue& kv) {
  SequenceSpec spec;
  spec.pos = line.at(kv.value_begin);
  const std::string_view s = line.text;
  if (s[kv.value_begin] != '[') {
    spec.items.push_back(expression_at(line, kv.value_begin, kv.value_end));
    return spec;
  }
  spec.is_list = true;
  if (s[kv.value_end - 1] != ']') line.fail(kv.value_end - 1, "expected ']' to close the list");
  const std::size_t close = kv.value_end - 1;
  std::size_t item = kv.value_begin + 1;
  int depth = 0;
  for (std::size_t i = item; i <= close; ++i) {
    if (i < close && s[i] == '(') ++depth;
    if (i < close && s[i] == ')') --depth;
    if (i == close || (s[i] == ',' && depth == 0)) {
      const std::size_t b = skip_blank(s, item);
      const std::size_t e = trim_right(s, i);
      if (b >= e) {
        if (i == close && spec.items.empty()) line.fail(i, "list is empty");
        line.fail(b, "empty list entry");
      }
      spec.items.push_back(expression_at(line, b, e));
      item = i + 1;
    }
  }
  return spec;
}

ComponentDecl parse_component(const Line& line, std::size_t begin) {
  const std::string_view s = line.text;
  std::size_t end = begin;
  while (end < s.size() && is_ident_char(s[end])) ++end;
  const std::string_view word = s.substr(begin, end - begin);
  ComponentDecl decl;
  decl.pos = line.at(begin);
  if (word == "atom") decl.kind = Kind::atom;
  else if (word == "atoms") decl.kind = Kind::atoms;
  else if (word == "circle") decl.kind = Kind::circle;
  else if (word == "radial") decl.kind = Kind::radial;
  else line.fail(begin, "unknown measure component '" + std::string(word) + "'");
  if (end < s.size() && !is_blank(s[end])) line.fail(end, "expected whitespace after component name");

  const auto& keys = component_keys(decl.kind);
  std::map<std::string, ExprPtr> seen;
  bool have_range = false;
  for (const auto& kv : split_fields(line, end)) {
    if (decl.kind == Kind::atoms && kv.key == "n") {
      if (have_range) line.fail(kv.key_col, "duplicate key 'n'");
      have_range = true;
      const std::string_view range = s.substr(kv.value_begin, kv.value_end - kv.value_begin);
      const auto dots = range.find("..");
      const auto lo = dots == std::string_view::npos ? std::nullopt : parse_literal<long>(range.substr(0, dots));
      const auto hi = dots == std::string_view::npos ? std::nullopt : parse_literal<long>(range.substr(dots + 2));
      if (!lo || !hi) line.fail(kv.value_begin, "index range must look like lo..hi with integer bounds");
      if (*lo < 1 || *hi < *lo) line.fail(kv.value_begin, "index range needs 1 <= lo <= hi");
      decl.n_lo = *lo;
      decl.n_hi = *hi;
      continue;
    }
    if (std::find(keys.begin(), keys.end(), kv.key) == keys.end())
      line.fail(kv.key_col, "unknown key '" + kv.key + "' for " + std::string(word));
    if (seen.count(kv.key)) line.fail(kv.key_col, "duplicate key '" + kv.key + "'");
    seen[kv.key] = expression_at(line, kv.value_begin, kv.value_end);
  }
  if (decl.kind == Kind::atoms && !have_range) line.fail(begin, "atoms needs an index range n=lo..hi");
  for (const auto& key : keys) {
    auto it = seen.find(key);
    if (it == seen.end()) line.fail(begin, std::string(word) + " is missing '" + key + "'");
    decl.fields.push_back({key, it->second});
  }
  return decl;
}

void parse_option(const Line& line, const KeyValue& kv, InstanceOptions& options) {
  const std::string_view value = line.text.substr(kv.value_begin, kv.value_end - kv.value_begin);
  auto integer = [&](long min, const char* what) {
    const auto v = parse_literal<long>(value);
    if (!v || *v < min) line.fail(kv.value_begin, std::string(what) + " must be an integer >= " + std::to_string(min));
    return *v;
  };
  auto once = [&](bool present) {
    if (present) line.fail(kv.key_col, "duplicate key '" + kv.key + "'");
  };
  if (kv.key == "truncate") {
    once(options.truncate.has_value());
    options.truncate = integer(2, "truncate");
  } else if (kv.key == "window") {
    once(options.window.has_value());
    options.window = integer(1, "window");
  } else if (kv.key == "discretize") {
    once(options.discretize.has_value());
    options.discretize = integer(8, "discretize");
  } else if (kv.key == "tol") {
    once(options.tol.has_value());
    const auto v = parse_literal<double>(value);
    if (!v || !(*v > 0.0) || !std::isfinite(*v)) line.fail(kv.value_begin, "tol must be a positive number");
    options.tol = *v;
  } else if (kv.key == "tail_monotone") {
    once(options.tail_monotone.has_value());
    if (value == "true") options.tail_monotone = true;
    else if (value == "false") options.tail_monotone = false;
    else line.fail(kv.value_begin, "tail_monotone must be true or false");
  } else {
    line.fail(kv.key_col, "unknown option '" + kv.key + "'");
  }
}

bool equal(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!structurally_equal(*a[i], *b[i])) return false;
  return true;
}

double real_value(const Expr& e, std::optional<long> n, const char* what) {
  const auto z = evaluate(e, n);
  if (z.imag() != 0.0) throw EvalError(e.pos, std::string(what) + " must be real");
  return z.real();
}

}  // namespace

const ComponentDecl::Field* ComponentDecl::find(std::string_view key) const {
  for (const auto& f : fields)
    if (f.key == key) return &f;
  return nullptr;
}

ComponentDecl::Field* ComponentDecl::find(std::string_view key) {
  for (auto& f : fields)
    if (f.key == key) return &f;
  return nullptr;
}

const char* to_string(ComponentDecl::Kind kind) {
  switch (kind) {
    case Kind::atom: return "atom";
    case Kind::atoms: return "atoms";
    case Kind::circle: return "circle";
    case Kind::radial: return "radial";
  }
  return "?";
}

const std::vector<std::string>& component_keys(ComponentDecl::Kind kind) {
  static const std::vector<std::string> point{"z", "w"};
  static const std::vector<std::string> circle{"r", "w"};
  static const std::vector<std::string> radial{"a", "b", "alpha", "c"};
  switch (kind) {
    case Kind::circle: return circle;
    case Kind::radial: return radial;
    default: return point;
  }
}

InstanceFile parse_instance(std::string_view text) {
  enum class Section { none, sequence, weights, measure, options };
  InstanceFile file;
  Section current = Section::none;
  std::map<std::string, SourcePos> sections;
  bool have_gamma = false;
  bool have_v = false;

  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string_view raw = text.substr(start, stop - start);
    start = stop + 1;
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const Line line{raw.substr(0, trim_right(raw, raw.size())), number};
    const std::size_t first = skip_blank(line.text, 0);
    if (first >= line.text.size()) {
      if (stop == text.size()) break;
      continue;
    }

    if (line.text[first] == '[') {
      const auto close = line.text.find(']', first);
      if (close == std::string_view::npos) line.fail(first, "expected ']' to close the section header");
      if (close + 1 != line.text.size()) line.fail(close + 1, "unexpected text after section header");
      const std::string name(line.text.substr(first + 1, close - first - 1));
      if (name == "sequence") current = Section::sequence;
      else if (name == "weights") current = Section::weights;
      else if (name == "measure") current = Section::measure;
      else if (name == "options") current = Section::options;
      else line.fail(first, "unknown section [" + name + "]");
      if (const auto it = sections.find(name); it != sections.end())
        line.fail(first, "duplicate section [" + name + "] (first at " + to_string(it->second) + ")");
      sections[name] = line.at(first);
    } else if (current == Section::none) {
      line.fail(first, "expected a section header");
    } else if (current == Section::measure) {
      file.measure.push_back(parse_component(line, first));
    } else {
      const auto fields = split_fields(line, first);
      if (fields.size() != 1) line.fail(first, "expected exactly one key = value");
      const auto& kv = fields.front();
      if (current == Section::sequence) {
        if (kv.key != "gamma") line.fail(kv.key_col, "unknown key '" + kv.key + "' in [sequence]");
        if (have_gamma) line.fail(kv.key_col, "duplicate key 'gamma'");
        file.gamma = parse_sequence(line, kv);
        have_gamma = true;
      } else if (current == Section::weights) {
        if (kv.key != "v") line.fail(kv.key_col, "unknown key '" + kv.key + "' in [weights]");
        if (have_v) line.fail(kv.key_col, "duplicate key 'v'");
        file.weights = parse_sequence(line, kv);
        have_v = true;
      } else {
        parse_option(line, kv, file.options);
      }
    }
    if (stop == text.size()) break;
  }

  const SourcePos eof{number, 1};
  if (!sections.count("sequence")) throw ParseError(eof, "missing [sequence] section");
  if (!sections.count("weights")) throw ParseError(eof, "missing [weights] section");
  if (!have_gamma) throw ParseError(sections["sequence"], "[sequence] needs gamma = ...");
  if (!have_v) throw ParseError(sections["weights"], "[weights] needs v = ...");
  return file;
}

std::string print(const InstanceFile& file) {
  std::ostringstream out;
  auto sequence = [&](const char* key, const SequenceSpec& spec) {
    out << key << " = ";
    if (!spec.is_list) {
      out << print(*spec.items.front()) << '\n';
      return;
    }
    out << '[';
    for (std::size_t i = 0; i < spec.items.size(); ++i) out << (i ? ", " : "") << print(*spec.items[i]);
    out << "]\n";
  };
  out << "[sequence]\n";
  sequence("gamma", file.gamma);
  out << "[weights]\n";
  sequence("v", file.weights);
  out << "[measure]\n";
  for (const auto& c : file.measure) {
    out << to_string(c.kind);
    if (c.kind == Kind::atoms) out << " n=" << c.n_lo << ".." << c.n_hi;
    for (const auto& f : c.fields) out << ' ' << f.key << '=' << print(*f.value);
    out << '\n';
  }
  const auto& o = file.options;
  if (o.truncate || o.tol || o.window || o.discretize || o.tail_monotone) {
    out << "[options]\n";
    if (o.truncate) out << "truncate = " << *o.truncate << '\n';
    if (o.tol) out << "tol = " << format_number(*o.tol) << '\n';
    if (o.window) out << "window = " << *o.window << '\n';
    if (o.discretize) out << "discretize = " << *o.discretize << '\n';
    if (o.tail_monotone) out << "tail_monotone = " << (*o.tail_monotone ? "true" : "false") << '\n';
  }
  return out.str();
}

bool structurally_equal(const InstanceFile& a, const InstanceFile& b) {
  if (a.gamma.is_list != b.gamma.is_list || !equal(a.gamma.items, b.gamma.items)) return false;
  if (a.weights.is_list != b.weights.is_list || !equal(a.weights.items, b.weights.items)) return false;
  if (a.measure.size() != b.measure.size()) return false;
  for (std::size_t i = 0; i < a.measure.size(); ++i) {
    const auto& x = a.measure[i];
    const auto& y = b.measure[i];
    if (x.kind != y.kind || x.n_lo != y.n_lo || x.n_hi != y.n_hi || x.fields.size() != y.fields.size()) return false;
    for (std::size_t j = 0; j < x.fields.size(); ++j)
      if (x.fields[j].key != y.fields[j].key || !structurally_equal(*x.fields[j].value, *y.fields[j].value))
        return false;
  }
  const auto& p = a.options;
  const auto& q = b.options;
  return p.truncate == q.truncate && p.tol == q.tol && p.window == q.window && p.discretize == q.discretize &&
         p.tail_monotone == q.tail_monotone;
}

CriteriaOptions Settings::criteria() const {
  CriteriaOptions options;
  options.window = window;
  options.tail_monotone = tail_monotone;
  return options;
}

Settings resolve_settings(const InstanceFile& file, const Overrides& overrides) {
  Settings s;
  if (overrides.truncate) s.size = *overrides.truncate;
  else if (file.options.truncate) s.size = *file.options.truncate;
  else if (file.gamma.is_list || file.weights.is_list) {
    s.size = std::numeric_limits<Index>::max();
    if (file.gamma.is_list) s.size = std::min<Index>(s.size, static_cast<Index>(file.gamma.items.size()));
    if (file.weights.is_list) s.size = std::min<Index>(s.size, static_cast<Index>(file.weights.items.size()));
  } else {
    s.size = default_truncation;
  }
  if (s.size < 1) throw InvalidInstance("truncation must be positive");
  s.tol = overrides.tol.value_or(file.options.tol.value_or(s.tol));
  s.window = overrides.window.value_or(file.options.window.value_or(0));
  s.discretize = static_cast<int>(overrides.discretize.value_or(file.options.discretize.value_or(s.discretize)));
  s.tail_monotone = file.options.tail_monotone.value_or(false);
  if (!(s.tol > 0.0)) throw InvalidInstance("tol must be positive");
  if (s.window < 0) throw InvalidInstance("window must be positive");
  if (s.discretize < 8) throw InvalidInstance("discretize must be at least 8");
  return s;
}

Instance build(const InstanceFile& file, const Overrides& overrides) {
  const Settings settings = resolve_settings(file, overrides);
  const Index size = settings.size;

  auto check_length = [&](const SequenceSpec& spec, const char* name) {
    if (spec.is_list && static_cast<Index>(spec.items.size()) < size)
      throw InvalidInstance(to_string(spec.pos) + ": " + name + " lists " + std::to_string(spec.items.size()) +
                            " entries but N = " + std::to_string(size));
  };
  check_length(file.gamma, "gamma");
  check_length(file.weights, "v");

  ComplexVector<double> gamma(size);
  RealVector<double> v(size);
  for (Index k = 0; k < size; ++k) {
    const long n = static_cast<long>(k + 1);
    const Expr& g = *file.gamma.items[file.gamma.is_list ? static_cast<std::size_t>(k) : 0];
    const Expr& w = *file.weights.items[file.weights.is_list ? static_cast<std::size_t>(k) : 0];
    gamma[k] = evaluate(g, n);
    v[k] = real_value(w, n, "weight");
  }
  auto located = [](const SourcePos& pos, auto&& make) {
    try {
      return make();
    } catch (const EvalError&) {
      throw;
    } catch (const InvalidInstance& e) {
      throw InvalidInstance(to_string(pos) + ": " + e.what());
    }
  };
  auto gamma_seq = located(file.gamma.pos, [&] { return GammaSequence<double>(gamma); });
  auto weight_seq = located(file.weights.pos, [&] { return WeightSequence<double>(v); });
  auto space = located(file.gamma.pos, [&] { return SpacePair<double>(std::move(gamma_seq), std::move(weight_seq)); });

  std::vector<MeasureComponent<double>> components;
  for (const auto& c : file.measure) {
    auto value = [&](const char* key, std::optional<long> n = std::nullopt) {
      return real_value(*c.find(key)->value, n, key);
    };
    switch (c.kind) {
      case Kind::atom:
        components.emplace_back(Atom<double>{evaluate(*c.find("z")->value), value("w")});
        break;
      case Kind::atoms:
        components.emplace_back(AtomFamily<double>::generate(c.n_lo, c.n_hi, [&](long n) {
          return Atom<double>{evaluate(*c.find("z")->value, n), value("w", n)};
        }));
        break;
      case Kind::circle:
        components.emplace_back(CircleUniform<double>{value("r"), value("w")});
        break;
      case Kind::radial:
        components.emplace_back(RadialPower<double>{value("a"), value("b"), value("alpha"), value("c")});
        break;
    }
    located(c.pos, [&] {
      Measure<double>({components.back()}).validate_against(space);
      return 0;
    });
  }
  Measure<double> measure(std::move(components));
  return Instance{std::move(space), std::move(measure), settings};
}

}  // namespace carleson::dsl
