#include <iostream>

#include "CLI11.hpp"
#include "carleson/dsl/commands.hpp"

int main(int argc, char** argv) {
  using namespace carleson::dsl;
  CLI::App app{"Carleson-measure checks for the spaces H(Gamma, v)"};
  app.set_version_flag("--version", "hcarleson 1.0");

  std::string command;
  std::string instance;
  RunFlags flags;
  long truncate = 0;
  double tol = 0.0;
  long window = 0;
  long discretize = 0;
  std::string out;
  std::string sweep;

  app.add_option("command", command, "validate | check | compact | hs | oracle | report | sweep")
      ->required()
      ->check(CLI::IsMember(command_names()));
  app.add_option("instance", instance, "instance file, or - for standard input")->required();
  auto* truncate_opt = app.add_option("--truncate", truncate, "number of nodes N")->check(CLI::Range(2L, 1000000L));
  auto* tol_opt = app.add_option("--tol", tol, "power-iteration relative residual target")->check(CLI::PositiveNumber);
  auto* window_opt = app.add_option("--window", window, "trailing window length for the tail tests")->check(CLI::PositiveNumber);
  auto* discretize_opt = app.add_option("--discretize", discretize, "atoms per circle / radial grid for the oracle")
                             ->check(CLI::Range(8L, 100000L));
  app.add_flag("--strict", flags.strict, "exit 3 on non-convergence or quadrature failure");
  auto* out_opt = app.add_option("--out", out, "write the report to this file");
  auto* sweep_opt = app.add_option("--sweep", sweep, "param=start:step:end (sweep command)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_parse;
  }
  if (*truncate_opt) flags.overrides.truncate = truncate;
  if (*tol_opt) flags.overrides.tol = tol;
  if (*window_opt) flags.overrides.window = window;
  if (*discretize_opt) flags.overrides.discretize = discretize;
  if (*out_opt) flags.out = out;
  if (*sweep_opt) flags.sweep = sweep;
  return run_file(command, instance, flags, std::cout, std::cerr);
}
