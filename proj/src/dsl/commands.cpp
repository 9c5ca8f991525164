#include "carleson/dsl/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace carleson::dsl {

namespace {

constexpr const char* index_note =
    "node indices are 1-based: n = 1 is the innermost node and annulus n contains gamma_n; "
    "tail cut N0 counts the leading coordinates removed";

struct Analysis {
  QuantitySequences<double> q;
  Certificate<double> carleson;
  Certificate<double> compact;
  HSReport<double> hs;
  Diagnostics diagnostics;
};

Analysis analyse(const Instance& inst, bool with_hs) {
  Analysis a;
  const auto options = inst.settings.criteria();
  a.q = quantity_sequences(inst.space, inst.measure, &a.diagnostics);
  a.carleson = carleson_check(inst.space, inst.measure, a.q, options);
  a.compact = compactness_check(inst.space, inst.measure, a.q, a.carleson, options);
  if (with_hs) a.hs = hs_check(inst.space, inst.measure, a.q, &a.diagnostics);
  return a;
}

OracleResult<double> run_oracle(const Instance& inst, const Analysis& a) {
  ValidationOptions opts;
  opts.resolution = inst.settings.discretize;
  opts.power.tol = inst.settings.tol;
  return validate(inst.space, inst.measure, a.carleson, a.compact, opts);
}

Json vector_json(const RealVector<double>& x) {
  Json out = Json::array();
  for (Index i = 0; i < x.size(); ++i) out.push_back(x[i]);
  return out;
}

Json strings_json(const std::vector<std::string>& xs) {
  Json out = Json::array();
  for (const auto& s : xs) out.push_back(s);
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

long integral_value(std::string_view param, double value) {
  if (value != std::floor(value) || std::abs(value) > 1e9)
    throw ParseError({1, 1}, "sweep value for " + std::string(param) + " must be an integer");
  return static_cast<long>(value);
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_number(x);
}

int emit(const std::string& text, const RunFlags& flags, std::ostream& out, std::ostream& err) {
  if (!flags.out) {
    out << text;
    return exit_ok;
  }
  std::ofstream file(*flags.out, std::ios::binary);
  if (!file) {
    err << "error: cannot write " << *flags.out << '\n';
    return exit_parse;
  }
  file << text;
  return exit_ok;
}

int finish(const std::string& text, bool trouble, const std::vector<std::string>& messages, const RunFlags& flags,
           std::ostream& out, std::ostream& err) {
  for (const auto& m : messages) err << "warning: " << m << '\n';
  const int code = emit(text, flags, out, err);
  if (code != exit_ok) return code;
  if (trouble && flags.strict) {
    err << "error: numerical failure (--strict)\n";
    return exit_numerical;
  }
  return exit_ok;
}

int run_sweep(const InstanceFile& file, const RunFlags& flags, std::ostream& out, std::ostream& err) {
  if (!flags.sweep) throw ParseError({1, 1}, "sweep needs --sweep param=start:step:end");
  const auto spec = parse_sweep(*flags.sweep);
  std::ostringstream csv;
  csv << "param,sup_A,sup_D,op_norm_sq,hs_exact,verdicts\n";
  bool trouble = false;
  std::vector<std::string> messages;
  for (double value : spec.values) {
    Overrides overrides = flags.overrides;
    const auto swept = apply_sweep(file, overrides, spec.param, value);
    const auto inst = build(swept, overrides);
    const auto a = analyse(inst, true);
    if (detail::has_infinity(a.q.A)) {
      messages.push_back(spec.param + "=" + csv_number(value) + ": measure is not integrable, op_norm_sq is inf");
      csv << csv_number(value) << ',' << csv_number(a.carleson.sup_A) << ',' << csv_number(a.carleson.sup_D)
          << ",inf," << csv_number(a.hs.hs_exact) << ',' << to_string(a.carleson.verdict) << '/'
          << to_string(a.compact.verdict) << '\n';
      continue;
    }
    const Measure<double> atomic = inst.measure.atoms_only() ? inst.measure : discretize(inst.measure, inst.settings.discretize);
    PowerIterationOptions power;
    power.tol = inst.settings.tol;
    const auto s = spectral_summary(build_embedding(inst.space, atomic), 1, {}, power);
    trouble = trouble || a.diagnostics.quadrature_failed || !s.converged;
    for (const auto& m : a.diagnostics.messages) messages.push_back(spec.param + "=" + csv_number(value) + ": " + m);
    if (!s.converged) messages.push_back(spec.param + "=" + csv_number(value) + ": power iteration did not converge");
    csv << csv_number(value) << ',' << csv_number(a.carleson.sup_A) << ',' << csv_number(a.carleson.sup_D) << ','
        << csv_number(s.op_norm * s.op_norm) << ',' << csv_number(a.hs.hs_exact) << ',' << to_string(a.carleson.verdict)
        << '/' << to_string(a.compact.verdict) << '\n';
  }
  return finish(csv.str(), trouble, messages, flags, out, err);
}

int dispatch(const std::string& command, std::string_view text, const RunFlags& flags, std::ostream& out,
             std::ostream& err) {
  const auto file = parse_instance(text);
  if (command == "sweep") return run_sweep(file, flags, out, err);

  const auto inst = build(file, flags.overrides);
  Json doc;
  doc["meta"] = meta_json(command, inst.settings);
  bool trouble = false;
  std::vector<std::string> messages;

  if (command == "validate") {
    doc["hypotheses"] = hypotheses_json(inst);
    return finish(write_json(doc), false, messages, flags, out, err);
  }
  const bool want_hs = command == "hs" || command == "report";
  const auto a = analyse(inst, want_hs);
  trouble = a.diagnostics.quadrature_failed;
  messages = a.diagnostics.messages;
  if (command == "report") doc["hypotheses"] = hypotheses_json(inst);
  if (command == "check" || command == "report") doc["carleson"] = certificate_json(a.carleson);
  if (command == "compact" || command == "report") doc["compactness"] = certificate_json(a.compact);
  if (want_hs) doc["hs"] = hs_json(a.hs);
  if ((command == "oracle" || command == "report") && detail::has_infinity(a.q.A)) {
    doc["oracle"] = {{"applicable", false},
                     {"reason", "the measure is not integrable against |z - gamma_n|^-2; the embedding is unbounded"}};
  } else if (command == "oracle" || command == "report") {
    const auto r = run_oracle(inst, a);
    doc["oracle"] = {{"applicable", true},
                     {"spectral", spectral_json(r.spectral)},
                     {"consistency", consistency_json(r.record)}};
    trouble = trouble || !r.record.converged;
    for (const auto& f : r.record.findings) messages.push_back("oracle: " + f);
  }
  if (command == "report") {
    doc["quantities"] = {{"A", vector_json(a.q.A)},           {"D", vector_json(a.q.D)},
                         {"tau_sq", vector_json(a.q.tau_sq)}, {"mass", vector_json(a.q.mass)},
                         {"Vhat", vector_json(a.q.Vhat)},     {"P", vector_json(a.q.P)},
                         {"P_upper", vector_json(a.q.P_upper)}};
  }
  doc["diagnostics"] = strings_json(a.diagnostics.messages);
  return finish(write_json(doc), trouble, messages, flags, out, err);
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"validate", "check", "compact", "hs", "oracle", "report", "sweep"};
  return names;
}

SweepSpec parse_sweep(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ParseError({1, 1}, "sweep must look like param=start:step:end");
  SweepSpec spec;
  spec.param = std::string(text.substr(0, eq));
  const std::string_view range = text.substr(eq + 1);
  const auto c1 = range.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : range.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw ParseError({1, static_cast<int>(eq) + 2}, "sweep range must be start:step:end");
  const auto start = parse_double(range.substr(0, c1));
  const auto step = parse_double(range.substr(c1 + 1, c2 - c1 - 1));
  const auto end = parse_double(range.substr(c2 + 1));
  if (!start || !step || !end) throw ParseError({1, static_cast<int>(eq) + 2}, "malformed number in sweep range");
  if (*step == 0.0 || (*end - *start) / *step < 0.0)
    throw ParseError({1, static_cast<int>(eq) + 2}, "sweep step must be nonzero and point from start to end");
  const double count = std::floor((*end - *start) / *step + 1e-9) + 1.0;
  if (count > 10000) throw ParseError({1, static_cast<int>(eq) + 2}, "sweep has more than 10000 values");
  for (long k = 0; k < static_cast<long>(count); ++k) spec.values.push_back(*start + static_cast<double>(k) * *step);
  return spec;
}

InstanceFile apply_sweep(const InstanceFile& file, Overrides& overrides, std::string_view param, double value) {
  InstanceFile out = file;
  if (param == "truncate") {
    overrides.truncate = integral_value(param, value);
  } else if (param == "window") {
    overrides.window = integral_value(param, value);
  } else if (param == "discretize") {
    overrides.discretize = integral_value(param, value);
  } else if (param == "tol") {
    overrides.tol = value;
  } else if (param.size() > 1 && param[0] == 'm' && param.find('.') != std::string_view::npos) {
    const auto dot = param.find('.');
    long k = 0;
    const auto [end, ec] = std::from_chars(param.data() + 1, param.data() + dot, k);
    if (ec != std::errc() || end != param.data() + dot || k < 1 || k > static_cast<long>(out.measure.size()))
      throw ParseError({1, 1}, "sweep target " + std::string(param) + " does not name a measure component");
    auto& component = out.measure[static_cast<std::size_t>(k - 1)];
    auto* field = component.find(param.substr(dot + 1));
    if (!field)
      throw ParseError({1, 1}, "measure component " + std::to_string(k) + " (" + to_string(component.kind) +
                                   ") has no field '" + std::string(param.substr(dot + 1)) + "'");
    field->value = Expr::literal(value);
  } else {
    throw ParseError({1, 1}, "unknown sweep parameter '" + std::string(param) + "'");
  }
  if (overrides.window && overrides.window < 1) throw InvalidInstance("window must be positive");
  if (overrides.truncate && overrides.truncate < 2) throw InvalidInstance("truncate must be at least 2");
  return out;
}

Json meta_json(const std::string& command, const Settings& settings) {
  const CriteriaOptions c = settings.criteria();
  const QuadratureOptions quad;
  return {{"command", command},
          {"N", settings.size},
          {"window", detail::resolve_window(settings.window, settings.size)},
          {"tol", settings.tol},
          {"discretize", settings.discretize},
          {"tail_monotone", settings.tail_monotone},
          {"quadrature_rel_tol", quad.rel_tol},
          {"decay_margin", c.decay_margin},
          {"liminf_floor", c.liminf_floor},
          {"bounded_slack", c.bounded_slack},
          {"index_base", 1},
          {"index_note", index_note}};
}

Json hypotheses_json(const Instance& inst) {
  const auto& space = inst.space;
  const auto ratio = space.gamma().sparseness_ratio();
  const auto& adm = space.admissibility();
  const auto regime = corollary_regime(space, inst.settings.window);
  Json out;
  out["sparseness_ratio"] = ratio ? *ratio : std::numeric_limits<double>::quiet_NaN();
  out["sparse"] = space.gamma().sparse();
  out["admissible"] = to_string(adm.flag);
  out["admissibility_partial_sum"] = adm.partial;
  out["admissibility_tail_ratio"] = adm.tail_ratio;
  out["cor_exp_weights"] = regime.cor_exp_weights;
  out["cor_summable"] = regime.cor_summable;
  out["min_weight_ratio"] = regime.min_weight_ratio;
  out["max_weight_ratio"] = regime.max_weight_ratio;
  out["max_decay_ratio"] = regime.max_decay_ratio;
  out["measure_components"] = inst.measure.components().size();
  out["measure_atoms_only"] = inst.measure.atoms_only();
  out["total_mass"] = inst.measure.total_mass();
  return out;
}

Json certificate_json(const Certificate<double>& c) {
  return {{"verdict", to_string(c.verdict)},
          {"tail_mode", to_string(c.tail)},
          {"c_star", c.c_star},
          {"sup_A", c.sup_A},
          {"witness_A", c.witness_A + 1},
          {"sup_D", c.sup_D},
          {"witness_D", c.witness_D + 1},
          {"window_begin", c.window_begin + 1},
          {"window_end", c.window_end + 1},
          {"window_max_A", c.window_max_A},
          {"window_min_A", c.window_min_A},
          {"window_max_D", c.window_max_D},
          {"window_min_D", c.window_min_D},
          {"decay_ratio_A", c.decay_ratio_A},
          {"decay_ratio_D", c.decay_ratio_D},
          {"notes", strings_json(c.notes)}};
}

Json hs_json(const HSReport<double>& hs) {
  return {{"hs_exact", hs.hs_exact},
          {"local_sum", hs.local_sum},
          {"global_sum", hs.global_sum},
          {"hs_finite", hs.hs_finite},
          {"condition_finite", hs.condition_finite},
          {"q_energy", vector_json(hs.q_energy)}};
}

Json spectral_json(const SpectralSummary<double>& s) {
  Json tails = Json::array();
  for (const auto& [cut, norm] : s.tail_norms) tails.push_back({{"N0", cut}, {"norm", norm}});
  Json top = Json::array();
  for (double x : s.top_singular_values) top.push_back(x);
  return {{"op_norm", s.op_norm},
          {"op_norm_sq", s.op_norm * s.op_norm},
          {"top_singular_values", top},
          {"frobenius", s.frobenius},
          {"frobenius_sq", s.frobenius_sq},
          {"tail_norms", tails},
          {"iterations", s.iterations},
          {"residual", s.residual},
          {"converged", s.converged}};
}

Json consistency_json(const ConsistencyRecord& r) {
  return {{"consistent", r.consistent()},
          {"op_norm_sq", r.op_norm_sq},
          {"max_q_energy", r.max_q_energy},
          {"lower_bound_ok", r.lower_bound_ok},
          {"max_test_vector_energy", r.max_test_vector_energy},
          {"test_vectors_ok", r.test_vectors_ok},
          {"c_star", r.c_star},
          {"ratio", r.ratio},
          {"ratio_ok", r.ratio_ok},
          {"frobenius_sq", r.frobenius_sq},
          {"hs_exact", r.hs_exact},
          {"hs_rel_error", r.hs_rel_error},
          {"hs_ok", r.hs_ok},
          {"tail_trend", r.tail_trend},
          {"tail_consistent", r.tail_consistent},
          {"converged", r.converged},
          {"discretized_atoms", r.discretized_atoms},
          {"findings", strings_json(r.findings)}};
}

int run(const std::string& command, std::string_view instance_text, const RunFlags& flags, std::ostream& out,
        std::ostream& err) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    err << "error: unknown command '" << command << "'\n";
    return exit_parse;
  }
  try {
    return dispatch(command, instance_text, flags, out, err);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return exit_parse;
  } catch (const EvalError& e) {
    err << "evaluation error: " << e.what() << '\n';
    return exit_invalid;
  } catch (const InvalidInstance& e) {
    err << "invalid instance: " << e.what() << '\n';
    return exit_invalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_invalid;
  }
}

int run_file(const std::string& command, const std::string& path, const RunFlags& flags, std::ostream& out,
             std::ostream& err) {
  std::ostringstream text;
  if (path == "-") {
    text << std::cin.rdbuf();
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      err << "error: cannot read " << path << '\n';
      return exit_parse;
    }
    text << in.rdbuf();
  }
  return run(command, text.str(), flags, out, err);
}

}  // namespace carleson::dsl
