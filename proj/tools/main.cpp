#include "app/config.hpp"
#include "app/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace piezohom;

int main(int argc, char** argv) {
  CLI::App cli{"piezohom: homogenization of piezoelectric fiber RVEs with electromechanical contact"};
  cli.require_subcommand(1);

  std::string config_path;
  std::string out;
  int threads = 0;
  std::optional<bool> deterministic;
  double tol = 0.0;
  int max_iter = 0;

  cli.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  cli.add_option("--out", out, "output directory");
  cli.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  cli.add_option("--deterministic", deterministic, "fixed-order assembly and merges (true/false)");
  cli.add_option("--tol", tol, "relative residual tolerance")->check(CLI::PositiveNumber);
  cli.add_option("--max-iter", max_iter, "Newton iteration limit")->check(CLI::PositiveNumber);

  struct Command {
    const char* name;
    const char* help;
    int (*body)(const app::RunConfig&, std::ostream&);
  };
  const Command commands[] = {
      {"mesh", "generate the RVE mesh and write it as text and VTK", app::run_mesh},
      {"solve", "solve one macro state and export the fields", app::run_solve},
      {"homogenize", "extract the eleven effective coefficients", app::run_homogenize},
      {"shell", "homogenize and integrate the shell constitutive matrix", app::run_shell},
      {"sweep", "secant coefficients over an amplitude schedule", app::run_sweep},
      {"check", "run the invariant suite", app::run_check},
  };
  for (const Command& c : commands) cli.add_subcommand(c.name, c.help)->fallthrough();

  CLI11_PARSE(cli, argc, argv);

  app::RunConfig cfg;
  try {
    cfg = config_path.empty() ? app::parse_config(nullptr) : app::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (!out.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(out, ec);
      std::ofstream(std::filesystem::path(out) / "FAILED") << "config: " << e.what() << '\n';
    }
    return 2;
  }
  if (!out.empty()) cfg.output = out;
  if (threads > 0) cfg.threads = threads;
  if (deterministic) cfg.deterministic = *deterministic;
  if (tol > 0.0) cfg.homogenize.solver.tol = tol;
  if (max_iter > 0) cfg.homogenize.solver.max_iter = max_iter;
  cfg.resolved["output"]["directory"] = cfg.output;
  cfg.resolved["run"]["threads"] = cfg.threads;
  cfg.resolved["run"]["deterministic"] = cfg.deterministic;
  cfg.resolved["solver"]["tol"] = cfg.homogenize.solver.tol;
  cfg.resolved["solver"]["max_iter"] = cfg.homogenize.solver.max_iter;

  for (const Command& c : commands)
    if (cli.got_subcommand(c.name)) return app::guarded(c.name, cfg, std::cout, c.body);
  return 2;
}
