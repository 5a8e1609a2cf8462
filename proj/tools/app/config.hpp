#pragma once

#include "piezohom/homogenize.hpp"
#include "piezohom/material.hpp"
#include "piezohom/mesh.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace piezohom::app {

enum class MeshKind { Fibers, Box };

struct RunConfig {
  MeshKind mesh_kind = MeshKind::Fibers;
  MeshParams mesh;
  Eigen::Vector3i box_divisions{2, 2, 2};
  Vec3 box_size{2.0, 2.0, 2.0};

  PiezoMaterial material = PiezoMaterial::pvdf();
  HomogenizeOptions homogenize;
  double amplitude = 0.01;

  // solve subcommand: either a Table-1 case or an explicit macro vector
  std::optional<Coefficient> solve_case = Coefficient::C11;
  double solve_amplitude = -0.1;
  std::optional<Vec9> solve_macro;

  double sweep_min = 1e-3;
  double sweep_max = 1e-1;
  int sweep_steps = 10;
  bool sweep_both_signs = true;

  double shell_thickness = 2.0;
  int shell_gauss = 2;
  double shell_mu_bar = 1.0;

  std::string output = "piezohom_out";
  bool vtk = true;
  int threads = 1;
  bool deterministic = true;

  nlohmann::json resolved;  ///< the effective configuration, for the manifest
};

/// Default configuration (the fibrous RVE of the examples).
nlohmann::json default_config_json();

/// Merges `overrides` into the defaults, applies PIEZOHOM_<SECTION>_<KEY>
/// environment overrides and validates. Unknown keys and wrong types throw
/// Error naming the key.
RunConfig parse_config(const nlohmann::json& overrides, bool use_environment = true);

RunConfig load_config(const std::string& path, bool use_environment = true);

}  // namespace piezohom::app
