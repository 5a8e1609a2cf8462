#include "config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

extern char** environ;

namespace piezohom::app {

using nlohmann::json;

json default_config_json() {
  return json::parse(R"({
    "mesh": {
      "kind": "fibers",
      "layout": "corner",
      "grid": [1, 1],
      "fiber_radius": 1.0,
      "circumferential": 16,
      "radial": 2,
      "axial": 2,
      "axial_length": 0.0,
      "core_fraction": 0.5,
      "area_preserving": true,
      "contact_half_angle_deg": 45.0,
      "box_divisions": [2, 2, 2],
      "box_size": [2.0, 2.0, 2.0]
    },
    "material": {
      "lambda": 80.3,
      "mu": 58.1,
      "d": [20e-12, 3e-12, -35e-12],
      "relative_permittivity": [12.0, 12.0, 12.0]
    },
    "penalty": {
      "rho_mech": 0.0,
      "rho_el": 0.0,
      "beta": 0.6666666666666666,
      "projection_tol": 1e-10,
      "max_projection_iter": 30
    },
    "solver": {
      "tol": 1e-10,
      "increment_tol": 1e-12,
      "max_iter": 30,
      "max_line_search": 10,
      "max_flips": 3
    },
    "homogenize": {
      "mode": "periodic",
      "contact": true,
      "field_scale": 1.0,
      "amplitude": 0.01
    },
    "solve": {
      "coefficient": "C11bar",
      "amplitude": -0.1,
      "macro": null
    },
    "sweep": {
      "min": 1e-3,
      "max": 1e-1,
      "steps": 10,
      "both_signs": true
    },
    "shell": {
      "thickness": 2.0,
      "gauss_points": 2,
      "mu_bar": 1.0
    },
    "output": {
      "directory": "piezohom_out",
      "vtk": true
    },
    "run": {
      "threads": 1,
      "deterministic": true
    }
  })");
}

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw Error("config: key '" + key + "' " + what);
}

void merge(json& base, const json& over, const std::string& prefix) {
  if (!over.is_object()) fail(prefix.empty() ? "<root>" : prefix, "must be an object");
  for (auto it = over.begin(); it != over.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) fail(key, "is not a known setting");
    json& target = base[it.key()];
    if (target.is_object()) {
      merge(target, it.value(), key);
    } else {
      target = it.value();
    }
  }
}

// PIEZOHOM_SOLVER_TOL=1e-8 sets solver.tol; the value is read as JSON when
// it parses, as a string otherwise.
void apply_environment(json& cfg) {
  const std::string prefix = "PIEZOHOM_";
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(prefix.size(), eq - prefix.size());
    for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto us = name.find('_');
    if (us == std::string::npos) continue;
    const std::string section = name.substr(0, us), key = name.substr(us + 1);
    if (!cfg.contains(section) || !cfg[section].is_object() || !cfg[section].contains(key))
      fail(section + "." + key, "from the environment is not a known setting");
    const std::string raw = entry.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    cfg[section][key] = value.is_discarded() ? json(raw) : value;
  }
}

double number(const json& cfg, const std::string& section, const std::string& key) {
  const json& v = cfg.at(section).at(key);
  if (!v.is_number()) fail(section + "." + key, "must be a number");
  return v.get<double>();
}

double positive(const json& cfg, const std::string& section, const std::string& key) {
  const double v = number(cfg, section, key);
  if (!(v > 0.0)) fail(section + "." + key, "must be positive");
  return v;
}

int integer(const json& cfg, const std::string& section, const std::string& key) {
  const json& v = cfg.at(section).at(key);
  if (!v.is_number_integer()) fail(section + "." + key, "must be an integer");
  return v.get<int>();
}

bool boolean(const json& cfg, const std::string& section, const std::string& key) {
  const json& v = cfg.at(section).at(key);
  if (!v.is_boolean()) fail(section + "." + key, "must be true or false");
  return v.get<bool>();
}

std::string text(const json& cfg, const std::string& section, const std::string& key) {
  const json& v = cfg.at(section).at(key);
  if (!v.is_string()) fail(section + "." + key, "must be a string");
  return v.get<std::string>();
}

template <int N>
Eigen::Matrix<double, N, 1> vector(const json& cfg, const std::string& section, const std::string& key) {
  const json& v = cfg.at(section).at(key);
  if (!v.is_array() || v.size() != N) fail(section + "." + key, "must be an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number()) fail(section + "." + key, "must contain numbers only");
    out(i) = v[static_cast<std::size_t>(i)].get<double>();
  }
  return out;
}

}  // namespace

RunConfig parse_config(const json& overrides, bool use_environment) {
  json cfg = default_config_json();
  if (!overrides.is_null()) merge(cfg, overrides, "");
  if (use_environment) apply_environment(cfg);

  RunConfig rc;
  const std::string kind = text(cfg, "mesh", "kind");
  if (kind == "fibers") {
    rc.mesh_kind = MeshKind::Fibers;
  } else if (kind == "box") {
    rc.mesh_kind = MeshKind::Box;
  } else {
    fail("mesh.kind", "must be \"fibers\" or \"box\"");
  }
  const std::string layout = text(cfg, "mesh", "layout");
  if (layout == "corner") {
    rc.mesh.layout = FiberLayout::Corner;
  } else if (layout == "centered") {
    rc.mesh.layout = FiberLayout::Centered;
  } else {
    fail("mesh.layout", "must be \"corner\" or \"centered\"");
  }
  const Eigen::Vector2d grid = vector<2>(cfg, "mesh", "grid");
  rc.mesh.grid = {static_cast<int>(grid(0)), static_cast<int>(grid(1))};
  if (grid(0) != rc.mesh.grid[0] || grid(1) != rc.mesh.grid[1] || rc.mesh.grid[0] < 1 || rc.mesh.grid[1] < 1)
    fail("mesh.grid", "must hold two positive integers");
  rc.mesh.fiber_radius = positive(cfg, "mesh", "fiber_radius");
  rc.mesh.circumferential = integer(cfg, "mesh", "circumferential");
  rc.mesh.radial = integer(cfg, "mesh", "radial");
  rc.mesh.axial = integer(cfg, "mesh", "axial");
  rc.mesh.axial_length = number(cfg, "mesh", "axial_length");
  rc.mesh.core_fraction = positive(cfg, "mesh", "core_fraction");
  rc.mesh.area_preserving = boolean(cfg, "mesh", "area_preserving");
  rc.mesh.contact_half_angle_deg = positive(cfg, "mesh", "contact_half_angle_deg");
  const Vec3 div = vector<3>(cfg, "mesh", "box_divisions");
  rc.box_divisions = div.cast<int>();
  if (div != rc.box_divisions.cast<double>() || rc.box_divisions.minCoeff() < 1)
    fail("mesh.box_divisions", "must hold three positive integers");
  rc.box_size = vector<3>(cfg, "mesh", "box_size");
  if (rc.box_size.minCoeff() <= 0.0) fail("mesh.box_size", "must be positive");
  try {
    rc.mesh.validate();
  } catch (const Error& e) {
    throw Error(std::string("config: mesh: ") + e.what());
  }

  rc.material = PiezoMaterial::from_si(number(cfg, "material", "lambda"), positive(cfg, "material", "mu"),
                                       vector<3>(cfg, "material", "d"),
                                       vector<3>(cfg, "material", "relative_permittivity"));

  PenaltyParams pen;
  const double rho_mech = number(cfg, "penalty", "rho_mech");
  const double rho_el = number(cfg, "penalty", "rho_el");
  pen.beta = positive(cfg, "penalty", "beta");
  pen.projection_tol = positive(cfg, "penalty", "projection_tol");
  pen.max_projection_iter = integer(cfg, "penalty", "max_projection_iter");
  if (rho_mech < 0.0) fail("penalty.rho_mech", "must not be negative (0 selects the default)");
  if (rho_el < 0.0) fail("penalty.rho_el", "must not be negative (0 selects the default)");
  // zeros mean "derive from the material and the cell edge", resolved once the mesh is known
  pen.rho_mech = rho_mech;
  pen.rho_el = rho_el;
  rc.homogenize.penalty = pen;

  SolverOptions& so = rc.homogenize.solver;
  so.tol = positive(cfg, "solver", "tol");
  so.increment_tol = positive(cfg, "solver", "increment_tol");
  so.max_iter = integer(cfg, "solver", "max_iter");
  so.max_line_search = integer(cfg, "solver", "max_line_search");
  so.max_flips = integer(cfg, "solver", "max_flips");

  const std::string mode = text(cfg, "homogenize", "mode");
  if (mode == "periodic") {
    rc.homogenize.mode = BoundaryMode::Periodic;
  } else if (mode == "faces") {
    rc.homogenize.mode = BoundaryMode::Faces;
  } else {
    fail("homogenize.mode", "must be \"periodic\" or \"faces\"");
  }
  rc.homogenize.contact = boolean(cfg, "homogenize", "contact");
  rc.homogenize.field_scale = positive(cfg, "homogenize", "field_scale");
  rc.amplitude = number(cfg, "homogenize", "amplitude");

  const json& macro = cfg["solve"]["macro"];
  if (!macro.is_null()) {
    rc.solve_macro = vector<9>(cfg, "solve", "macro");
    rc.solve_case.reset();
  } else {
    rc.solve_case = parse_coefficient(text(cfg, "solve", "coefficient"));
    if (!rc.solve_case) fail("solve.coefficient", "is not a coefficient name");
  }
  rc.solve_amplitude = number(cfg, "solve", "amplitude");

  rc.sweep_min = positive(cfg, "sweep", "min");
  rc.sweep_max = positive(cfg, "sweep", "max");
  rc.sweep_steps = integer(cfg, "sweep", "steps");
  rc.sweep_both_signs = boolean(cfg, "sweep", "both_signs");
  if (rc.sweep_max < rc.sweep_min) fail("sweep.max", "must not be below sweep.min");
  if (rc.sweep_steps < 1) fail("sweep.steps", "must be at least 1");

  rc.shell_thickness = positive(cfg, "shell", "thickness");
  rc.shell_gauss = integer(cfg, "shell", "gauss_points");
  rc.shell_mu_bar = positive(cfg, "shell", "mu_bar");
  if (rc.shell_gauss < 2) fail("shell.gauss_points", "must be at least 2");

  rc.output = text(cfg, "output", "directory");
  rc.vtk = boolean(cfg, "output", "vtk");
  rc.threads = integer(cfg, "run", "threads");
  rc.deterministic = boolean(cfg, "run", "deterministic");
  if (rc.threads < 1) fail("run.threads", "must be at least 1");
  try {
    so.validate();
  } catch (const Error& e) {
    throw Error(std::string("config: solver: ") + e.what());
  }
  rc.resolved = cfg;
  return rc;
}

RunConfig load_config(const std::string& path, bool use_environment) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  json j = json::parse(in, nullptr, false, true);
  if (j.is_discarded()) throw Error("config: '" + path + "' is not valid JSON");
  return parse_config(j, use_environment);
}

}  // namespace piezohom::app
