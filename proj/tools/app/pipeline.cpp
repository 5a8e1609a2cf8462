#include "pipeline.hpp"

#include "piezohom/io.hpp"
#include "piezohom/shell.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace piezohom::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

fs::path prepare_output(const RunConfig& cfg) {
  const fs::path dir(cfg.output);
  fs::create_directories(dir);
  fs::remove(dir / "FAILED");
  return dir;
}

std::ofstream open_file(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw Error("output: cannot write " + p.string());
  return out;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg, const json& results) {
  json m;
  m["program"] = "piezohom";
  m["version"] = kVersion;
  m["command"] = command;
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  m["threads"] = cfg.threads;
  m["deterministic"] = cfg.deterministic;
  m["random_seeds"] = json::array();  // the pipeline draws no random numbers
  m["config"] = cfg.resolved;
  m["results"] = results;
  std::ofstream out = open_file(dir / "manifest.json");
  out << m.dump(2) << '\n';
}

json report_json(const SolveReport& r) {
  return {{"iterations", r.iterations},
          {"converged", r.converged},
          {"final_residual_u", r.residual_u.empty() ? 0.0 : r.residual_u.back()},
          {"final_residual_phi", r.residual_phi.empty() ? 0.0 : r.residual_phi.back()},
          {"active_pairs", r.active_counts.empty() ? 0 : r.active_counts.back()},
          {"message", r.message}};
}

void log_matrix(std::ostream& log, const Mat9& d) {
  log << std::scientific << std::setprecision(4);
  for (int i = 0; i < 9; ++i) {
    for (int k = 0; k < 9; ++k) log << std::setw(12) << d(i, k);
    log << '\n';
  }
  log << std::defaultfloat;
}

struct Homogenized {
  RveMesh mesh;
  EffectiveMatrix em;
};

Homogenized homogenize(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  Homogenized h{build_mesh(cfg), {}};
  const RveSystem sys = make_rve_system(h.mesh, cfg.material, cfg.threads, cfg.deterministic);
  const HomogenizeOptions opt = resolve_options(cfg, h.mesh);
  h.em = build_secant_matrix(sys, cfg.amplitude, opt);
  std::ofstream csv = open_file(dir / "coefficients.csv");
  write_coefficient_header(csv);
  write_coefficient_rows(csv, h.em);
  std::ofstream mat = open_file(dir / "effective_matrix.csv");
  write_matrix_csv(mat, h.em.d);
  log << "secant matrix at amplitude " << cfg.amplitude << (h.em.partial ? " (PARTIAL)" : "") << '\n';
  for (const CaseResult& c : h.em.cases) {
    log << "  " << std::setw(9) << coefficient_name(c.coefficient) << " = " << std::setw(14) << c.value
        << "  iterations " << c.report.iterations;
    if (!c.valid) log << "  FAILED: " << c.error;
    log << '\n';
  }
  log_matrix(log, h.em.d);
  return h;
}

json cases_json(const EffectiveMatrix& em) {
  json out = json::array();
  for (const CaseResult& c : em.cases)
    out.push_back({{"coefficient", coefficient_name(c.coefficient)},
                   {"value", c.value},
                   {"valid", c.valid},
                   {"hill_gap", c.hill.defined ? json(c.hill.gap) : json(nullptr)},
                   {"hill_contact_ratio", c.hill.defined ? json(c.hill.bookkept) : json(nullptr)},
                   {"solver", report_json(c.report)},
                   {"error", c.error}});
  return out;
}

}  // namespace

RveMesh build_mesh(const RunConfig& cfg) {
  return cfg.mesh_kind == MeshKind::Box ? generate_box(cfg.box_divisions, cfg.box_size) : generate_fiber_rve(cfg.mesh);
}

HomogenizeOptions resolve_options(const RunConfig& cfg, const RveMesh& mesh) {
  HomogenizeOptions opt = cfg.homogenize;
  const PenaltyParams def = default_penalty(cfg.material, mesh.rve_edge());
  PenaltyParams pen = opt.penalty ? *opt.penalty : def;
  if (pen.rho_mech == 0.0) pen.rho_mech = def.rho_mech;
  if (pen.rho_el == 0.0) pen.rho_el = def.rho_el;
  pen.validate();
  opt.penalty = pen;
  opt.jobs = cfg.threads;
  opt.solver.threads = cfg.threads;
  opt.solver.deterministic = cfg.deterministic;
  return opt;
}

int run_mesh(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_output(cfg);
  const RveMesh mesh = build_mesh(cfg);
  check_mesh(mesh);
  std::ofstream txt = open_file(dir / "mesh.txt");
  write_mesh_text(txt, mesh);
  std::ofstream vtk = open_file(dir / "mesh.vtk");
  write_vtk(vtk, mesh, "piezohom mesh");
  const double fiber_area = std::numbers::pi * cfg.mesh.fiber_radius * cfg.mesh.fiber_radius;
  const double expected = cfg.mesh_kind == MeshKind::Box
                              ? mesh.cell_volume()
                              : fiber_area * cfg.mesh.grid[0] * cfg.mesh.grid[1] * mesh.cell_size(1);
  const double area_error = std::abs(mesh.solid_volume() - expected) / expected;
  log << "nodes " << mesh.num_nodes() << ", elements " << mesh.num_elements() << ", bonds " << mesh.bond_pairs.size()
      << ", contact interfaces " << mesh.contact_surfaces.size() << '\n'
      << "solid volume " << mesh.solid_volume() << " of " << mesh.cell_volume() << " (relative section error "
      << area_error << ")\n";
  write_manifest(dir, "mesh", cfg,
                 {{"nodes", mesh.num_nodes()},
                  {"elements", mesh.num_elements()},
                  {"bonds", mesh.bond_pairs.size()},
                  {"contact_interfaces", mesh.contact_surfaces.size()},
                  {"solid_volume", mesh.solid_volume()},
                  {"section_area_error", area_error}});
  return 0;
}

int run_solve(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_output(cfg);
  const RveMesh mesh = build_mesh(cfg);
  const RveSystem sys = make_rve_system(mesh, cfg.material, cfg.threads, cfg.deterministic);
  const HomogenizeOptions opt = resolve_options(cfg, mesh);
  Vec9 macro;
  std::optional<LoadCase> lc;
  if (cfg.solve_macro) {
    macro = *cfg.solve_macro;
  } else {
    lc = build_load_case(*cfg.solve_case, cfg.solve_amplitude);
    macro = lc->macro(opt.field_scale);
  }
  if (cfg.solve_macro && opt.mode == BoundaryMode::Faces)
    throw Error("solve: an explicit macro vector needs periodic boundary conditions");
  const Solution s = solve_macro_state(sys, macro, opt, lc ? &*lc : nullptr);
  const AveragedState avg = volume_average(mesh, sys.dofs, sys.d, s.q, macro);
  if (cfg.vtk) {
    std::ofstream vtk = open_file(dir / "solution.vtk");
    write_vtk(vtk, mesh, sys.dofs, sys.d, s.q, "piezohom solution");
  }
  Eigen::Vector4d lo = Eigen::Vector4d::Constant(1e300), hi = -lo;
  for (Index n = 0; n < mesh.num_nodes(); ++n)
    for (int k = 0; k < 4; ++k) {
      lo(k) = std::min(lo(k), s.q(sys.dofs.dof(n, k)));
      hi(k) = std::max(hi(k), s.q(sys.dofs.dof(n, k)));
    }
  log << (s.report.converged ? "converged" : "NOT converged") << " in " << s.report.iterations
      << " iterations, active pairs " << (s.report.active_counts.empty() ? 0 : s.report.active_counts.back()) << '\n';
  const char* field[4] = {"u1", "u2", "u3", "phi"};
  for (int k = 0; k < 4; ++k) log << "  " << field[k] << " in [" << lo(k) << ", " << hi(k) << "]\n";
  json ranges;
  for (int k = 0; k < 4; ++k) ranges[field[k]] = {lo(k), hi(k)};
  write_manifest(dir, "solve", cfg,
                 {{"solver", report_json(s.report)},
                  {"macro", std::vector<double>(macro.data(), macro.data() + 9)},
                  {"average_stress", std::vector<double>(avg.stress.data(), avg.stress.data() + 9)},
                  {"ranges", ranges}});
  return s.report.converged ? 0 : 1;
}

int run_homogenize(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_output(cfg);
  const Homogenized h = homogenize(cfg, dir, log);
  write_manifest(dir, "homogenize", cfg, {{"amplitude", cfg.amplitude}, {"partial", h.em.partial}, {"cases", cases_json(h.em)}});
  return h.em.partial ? 1 : 0;
}

int run_shell(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_output(cfg);
  const Homogenized h = homogenize(cfg, dir, log);
  const ShellMatrix<double> shell = integrate_shell_matrix(h.em.d, cfg.shell_thickness, cfg.shell_gauss, cfg.shell_mu_bar);
  std::ofstream csv = open_file(dir / "shell_matrix.csv");
  write_shell_csv(csv, shell.d);
  const std::string report = shell_block_report(shell);
  std::ofstream rep = open_file(dir / "shell_report.txt");
  rep << report;
  log << '\n' << report;
  write_manifest(dir, "shell", cfg,
                 {{"amplitude", cfg.amplitude},
                  {"partial", h.em.partial},
                  {"thickness", cfg.shell_thickness},
                  {"cases", cases_json(h.em)}});
  return h.em.partial ? 1 : 0;
}

int run_sweep(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_output(cfg);
  const RveMesh mesh = build_mesh(cfg);
  const RveSystem sys = make_rve_system(mesh, cfg.material, cfg.threads, cfg.deterministic);
  const HomogenizeOptions opt = resolve_options(cfg, mesh);
  const std::vector<double> schedule =
      amplitude_schedule(cfg.sweep_min, cfg.sweep_max, cfg.sweep_steps, cfg.sweep_both_signs);
  const std::vector<EffectiveMatrix> points = sweep_amplitudes(sys, schedule, opt);
  std::ofstream csv = open_file(dir / "sweep.csv");
  write_coefficient_header(csv);
  bool partial = false;
  json summary = json::array();
  for (const EffectiveMatrix& em : points) {
    write_coefficient_rows(csv, em);
    partial = partial || em.partial;
    log << "amplitude " << std::setw(12) << em.amplitude << ":  C11bar " << em.cases[0].value << ", C33bar "
        << em.cases[3].value << ", e33bar " << em.cases[7].value << (em.partial ? "  (PARTIAL)" : "") << '\n';
    summary.push_back({{"amplitude", em.amplitude}, {"partial", em.partial}});
  }
  write_manifest(dir, "sweep", cfg, {{"points", summary}, {"partial", partial}});
  return partial ? 1 : 0;
}

int run_check(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_output(cfg);
  json results = json::array();
  bool all = true;
  auto record = [&](const std::string& name, bool ok, double value) {
    log << (ok ? "PASS " : "FAIL ") << name << " (" << value << ")\n";
    results.push_back({{"check", name}, {"pass", ok}, {"value", value}});
    all = all && ok;
  };

  // homogenization identity on a homogeneous cube
  {
    const RveMesh cube = generate_box(Eigen::Vector3i(2, 2, 2), Vec3(2, 2, 2));
    const RveSystem sys = make_rve_system(cube, cfg.material);
    HomogenizeOptions opt = resolve_options(cfg, cube);
    opt.mode = BoundaryMode::Periodic;
    opt.contact = false;
    const FullCharacterization fc = characterize(sys, 0.01, opt);
    const double err = (fc.d - sys.d).cwiseAbs().maxCoeff() / sys.d.cwiseAbs().maxCoeff();
    record("homogeneous cube reproduces the micro matrix", !fc.partial && err < 1e-8, err);
  }
  // mesh integrity and section area
  const RveMesh mesh = build_mesh(cfg);
  check_mesh(mesh);
  record("mesh passes the integrity checks", true, double(mesh.num_elements()));
  // Hill condition without contact
  {
    const RveSystem sys = make_rve_system(mesh, cfg.material, cfg.threads, cfg.deterministic);
    HomogenizeOptions opt = resolve_options(cfg, mesh);
    opt.mode = BoundaryMode::Periodic;
    opt.contact = false;
    double worst = 0.0;
    bool ok = true;
    for (Coefficient c : kAllCoefficients) {
      const CaseResult r = run_load_case(sys, c, cfg.amplitude, opt);
      ok = ok && r.valid && r.hill.defined;
      worst = std::max(worst, r.hill.gap);
    }
    record("Hill condition without contact", ok && worst < 1e-6, worst);
  }
  // shell integration against the constant-matrix closed form
  {
    std::array<double, 11> k;
    for (std::size_t i = 0; i < 11; ++i) k[i] = 1.0 + double(i);
    const Mat9 dm = assemble_secant_matrix(k);
    const double h = cfg.shell_thickness;
    const ShellMatrix<double> s = integrate_shell_matrix(dm, h, cfg.shell_gauss);
    const double err = std::max(std::abs(s.d(0, 0) - h * k[0]) / (h * k[0]),
                                std::abs(s.d(3, 3) - h * h * h * k[0] / 12) / (h * h * h * k[0] / 12));
    record("shell thickness integration", err < 1e-14, err);
  }
  write_manifest(dir, "check", cfg, {{"checks", results}, {"pass", all}});
  return all ? 0 : 1;
}

int guarded(const std::string& command, const RunConfig& cfg, std::ostream& log,
            int (*body)(const RunConfig&, std::ostream&)) {
  try {
    const int status = body(cfg, log);
    if (status != 0) {
      std::ofstream marker(fs::path(cfg.output) / "FAILED");
      marker << command << ": finished with unconverged or failed results\n";
    }
    return status;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    std::error_code ec;
    fs::create_directories(cfg.output, ec);
    std::ofstream marker(fs::path(cfg.output) / "FAILED");
    marker << command << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace piezohom::app
