#pragma once

#include "config.hpp"

#include <iosfwd>
#include <string>

namespace piezohom::app {

/// Builds the RVE mesh of the configuration.
RveMesh build_mesh(const RunConfig& cfg);

/// Fills zero penalties from the material and the cell edge.
HomogenizeOptions resolve_options(const RunConfig& cfg, const RveMesh& mesh);

/// Subcommands. Each writes its artifacts under cfg.output plus a
/// manifest.json and returns the process exit status. `log` gets the
/// human-readable summary.
int run_mesh(const RunConfig& cfg, std::ostream& log);
int run_solve(const RunConfig& cfg, std::ostream& log);
int run_homogenize(const RunConfig& cfg, std::ostream& log);
int run_shell(const RunConfig& cfg, std::ostream& log);
int run_sweep(const RunConfig& cfg, std::ostream& log);
int run_check(const RunConfig& cfg, std::ostream& log);

/// Runs `body` and turns an Error into a FAILED marker in the output
/// directory and exit status 1.
int guarded(const std::string& command, const RunConfig& cfg, std::ostream& log, int (*body)(const RunConfig&, std::ostream&));

}  // namespace piezohom::app
