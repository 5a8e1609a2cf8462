// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "../support/fixtures.hpp"

#include "piezohom/bezier.hpp"
#include "piezohom/element.hpp"
#include "piezohom/homogenize.hpp"
#include "piezohom/shell.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace piezohom;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

int failures = 0;

void run(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (t > budget_s) {
    o.pass = false;
    o.detail += "; over the time budget";
  }
  if (!o.pass) ++failures;
  std::printf("%s [%d] %s: %s (%.2f s of %.0f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), t,
              budget_s);
  std::fflush(stdout);
}

// 1 ------------------------------------------------------------------------
Outcome homogenization_identity() {
  // inputs in SI, closed forms in internal units
  const double lambda = 80.3, mu = 58.1;
  const double d31 = 20e-12, d32 = 3e-12, d33 = -35e-12;
  const PiezoMaterial mat = PiezoMaterial::from_si(lambda, mu, Eigen::Vector3d(d31, d32, d33), Eigen::Vector3d::Constant(12));
  const double to_internal = 1e6;
  const double e31 = to_internal * (d31 * (lambda + 2 * mu) + d32 * lambda + d33 * lambda);
  const double e33 = to_internal * (d31 * lambda + d32 * lambda + d33 * (lambda + 2 * mu));
  const double eps = 12 * 8.854e-12 * to_internal;
  const std::array<double, 11> expected = {lambda + 2 * mu, lambda, lambda, lambda + 2 * mu, mu, mu,
                                           e31, e33, 0.0, eps, eps};

  const RveMesh cube = generate_box(Eigen::Vector3i(2, 2, 2), Vec3(2, 2, 2));
  const RveSystem sys = make_rve_system(cube, mat);
  HomogenizeOptions opt;
  opt.contact = false;
  const EffectiveMatrix em = build_secant_matrix(sys, 0.01, opt);
  double worst = 0.0;
  for (std::size_t i = 0; i < 11; ++i) {
    const double v = em.cases[i].value;
    worst = std::max(worst, expected[i] == 0.0 ? std::abs(v) / std::abs(e33) : rel(v, expected[i]));
  }
  std::ostringstream d;
  d << "C11 " << em.cases[0].value << ", C12 " << em.cases[1].value << ", C44 " << em.cases[4].value << ", e33 "
    << em.cases[7].value << ", eps33 " << em.cases[10].value << "; worst relative error " << worst;
  return {!em.partial && worst < 1e-6, d.str()};
}

// 2 ------------------------------------------------------------------------
Outcome element_fd() {
  const Mat9 d = micro_constitutive_matrix(PiezoMaterial::pvdf());
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst_r = 0.0, worst_k = 0.0;
  for (int s = 0; s < 100; ++s) {
    ElementState<double> st;
    const auto& ref = brick_reference_nodes();
    for (int a = 0; a < 8; ++a)
      for (int c = 0; c < 3; ++c) st.coords(a, c) = 0.5 * (ref(a, c) + 1.0) * (1.0 + 0.3 * c) + 0.1 * u(rng);
    ElemVec<double> q;
    for (int i = 0; i < 32; ++i) q(i) = (i % 4 == 3 ? 1.0 : 1e-2) * u(rng);
    st.set_dofs(q);
    const ElementResult<double> r = element_integrate(st, d);
    for (int i = 0; i < 32; ++i) {
      const double h = (i % 4 == 3 ? 1e-3 : 1e-5);
      ElementState<double> p = st, m = st;
      ElemVec<double> qp = q, qm = q;
      qp(i) += h;
      qm(i) -= h;
      p.set_dofs(qp);
      m.set_dofs(qm);
      const ElementResult<double> rp = element_integrate(p, d), rm = element_integrate(m, d);
      const double fd_r = (rp.energy - rm.energy) / (2 * h);
      worst_r = std::max(worst_r, std::abs(fd_r - r.residual(i)) / r.residual.cwiseAbs().maxCoeff());
      const ElemVec<double> fd_k = (rp.residual - rm.residual) / (2 * h);
      worst_k = std::max(worst_k, (fd_k - r.stiffness.col(i)).norm() / r.stiffness.col(i).norm());
    }
  }
  std::ostringstream o;
  o << "100 random states, residual vs energy " << worst_r << ", stiffness vs residual " << worst_k;
  return {worst_r < 1e-6 && worst_k < 1e-5, o.str()};
}

// 3 ------------------------------------------------------------------------
Outcome contact_closed_form() {
  const double w = 1.0, h = 1.0, delta = 0.01, v = 0.5;
  testing::TwoBricks tb = testing::two_bricks(w, h);
  PiezoMaterial mat = PiezoMaterial::pvdf();
  mat.d3.setZero();  // mechanical and electric springs in series, uncoupled
  Problem p;
  p.mesh = &tb.mesh;
  p.d = micro_constitutive_matrix(mat);
  p.constraints = testing::squeeze_constraints(tb, delta, v, true);
  p.contacts.push_back(tb.iface);
  p.penalty.rho_mech = 500.0;
  p.penalty.rho_el = 2e-4;
  const Solution s = newton_solve(p, SolverOptions());
  const double m = p.d(kE33, kE33), eps = p.d(kEl3, kEl3);
  const double force = delta / (h / m + 1 / p.penalty.rho_mech);  // traction
  const double current = v / (h / eps + 1 / p.penalty.rho_el);  // flux density
  double worst_g = 0.0, worst_phi = 0.0, total = 0.0;
  int active = 0;
  for (const PairState& ps : s.pairs[0]) {
    if (!ps.active) continue;
    ++active;
    worst_g = std::max(worst_g, rel(ps.pair.g_n, -force / p.penalty.rho_mech));
    worst_phi = std::max(worst_phi, rel(ps.pair.g_phi, current / p.penalty.rho_el));
    total += p.penalty.rho_mech * tb.iface.slave_areas[static_cast<std::size_t>(ps.pair.slave_local)] * ps.pair.g_n;
  }
  const double load = rel(-total, force * w * w);
  std::ostringstream o;
  o << active << " active pairs, g_N error " << worst_g << ", g_phi error " << worst_phi << ", interface force error "
    << load;
  return {s.report.converged && active == 9 && worst_g < 1e-8 && worst_phi < 1e-8 && load < 1e-8, o.str()};
}

// 4 ------------------------------------------------------------------------
Outcome bezier_construction() {
  Eigen::Matrix<double, 9, 3> g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g.row(3 * i + j) << 0.7 * (i - 1.0), 1.3 * (j - 1.0) + 0.1 * i, 0.0;
  const BezierPatch p = build_bezier9(g, Eigen::Matrix<double, 9, 1>::Zero());
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  double planar = p.control_points.col(2).cwiseAbs().maxCoeff(), unity = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double s = u(rng), t = u(rng);
    const Bernstein3 a = bernstein3(s), b = bernstein3(t);
    unity = std::max(unity, std::abs((a.b * b.b.transpose()).sum() - 1.0));
    planar = std::max(planar, std::abs(surface_eval(p, Eigen::Vector2d(s, t)).x(2)));
  }
  const bool beta_ok = p.beta == 2.0 / 3.0 && kDefaultBezierBeta == 2.0 / 3.0;
  std::ostringstream o;
  o << "beta " << p.beta << ", out-of-plane " << planar << ", partition of unity " << unity;
  return {beta_ok && planar <= 1e-12 && unity <= 1e-14, o.str()};
}

// 5 ------------------------------------------------------------------------
Outcome hill_condition() {
  const RveMesh m = generate_fiber_rve(MeshParams());
  const RveSystem sys = make_rve_system(m, PiezoMaterial::pvdf());
  HomogenizeOptions free_opt;
  free_opt.contact = false;
  double worst_free = 0.0;
  bool ok = true;
  for (Coefficient c : kAllCoefficients) {
    const CaseResult r = run_load_case(sys, c, 0.01, free_opt);
    ok = ok && r.valid && r.hill.defined;
    worst_free = std::max(worst_free, r.hill.gap);
  }
  HomogenizeOptions contact_opt;
  double worst_book = 0.0, largest_gap = 0.0;
  int with_contact = 0;
  for (Coefficient c : kAllCoefficients) {
    const CaseResult r = run_load_case(sys, c, -0.1, contact_opt);
    ok = ok && r.valid && r.hill.defined;
    if (r.report.active_counts.back() > 0) ++with_contact;
    largest_gap = std::max(largest_gap, r.hill.gap);
    worst_book = std::max(worst_book, std::abs(r.hill.gap - std::abs(r.hill.bookkept)));
  }
  std::ostringstream o;
  o << "contact-free gap " << worst_free << "; " << with_contact << " of 11 cases with active contact, gap up to "
    << largest_gap << ", |gap - contact ratio| " << worst_book;
  return {ok && worst_free < 1e-6 && with_contact > 0 && worst_book < 1e-8, o.str()};
}

// 6 ------------------------------------------------------------------------
Outcome shell_integration() {
  const std::array<double, 11> k = {46.2, 16.0, 8.9, 46.1, 20.5, 22.6, 2.1e-4, -1.1e-3, -2.06e-4, 4.14e-5, 4.1e-5};
  const Mat9 dm = assemble_secant_matrix(k);
  const double h = 1.7, b = h * h * h / 12;
  const ShellMatrix<double> s = integrate_shell_matrix(dm, h, 2);
  // printed entries (1-based) and their closed forms
  const std::vector<std::tuple<int, int, double>> entries = {
      {1, 1, h * k[0]}, {4, 4, b * k[0]}, {13, 1, h * k[6]}, {13, 13, h * k[10]}, {1, 2, h * k[1]},
      {1, 11, h * k[2]}, {1, 13, -h * k[6]}, {3, 3, h * k[4]}, {3, 10, -h * k[8]}, {6, 6, b * k[4]},
      {7, 7, h * k[4]}, {8, 8, h * k[5]}, {9, 7, h * k[8]}, {11, 11, h * k[3]}, {12, 12, b * k[3]},
      {12, 14, -b * k[7]}, {14, 14, b * k[10]}, {14, 4, b * k[6]}};
  Eigen::Matrix<bool, 14, 14> printed = Eigen::Matrix<bool, 14, 14>::Constant(false);
  // the printed non-zero pattern
  const int nz[][2] = {{1, 1}, {1, 2}, {1, 11}, {1, 13}, {2, 1}, {2, 2}, {2, 11}, {2, 13}, {3, 3}, {3, 10},
                       {4, 4}, {4, 5}, {4, 12}, {4, 14}, {5, 4}, {5, 5}, {5, 12}, {5, 14}, {6, 6}, {7, 7},
                       {7, 9}, {8, 8}, {9, 7}, {9, 9}, {10, 3}, {10, 10}, {11, 1}, {11, 2}, {11, 11}, {11, 13},
                       {12, 4}, {12, 5}, {12, 12}, {12, 14}, {13, 1}, {13, 2}, {13, 11}, {13, 13}, {14, 4}, {14, 5},
                       {14, 12}, {14, 14}};
  for (const auto& e : nz) printed(e[0] - 1, e[1] - 1) = true;
  double worst = 0.0;
  for (const auto& [i, j, v] : entries) worst = std::max(worst, rel(s.d(i - 1, j - 1), v));
  int stray = 0;
  for (int i = 0; i < 14; ++i)
    for (int j = 0; j < 14; ++j)
      if (!printed(i, j) && s.d(i, j) != 0.0) ++stray;
  std::ostringstream o;
  o << "worst entry error " << worst << ", non-zeros in printed zero slots " << stray;
  return {worst <= 1e-14 && stray == 0, o.str()};
}

// 7 ------------------------------------------------------------------------
Outcome symmetry_class() {
  const RveMesh m = generate_fiber_rve(MeshParams());
  const RveSystem sys = make_rve_system(m, PiezoMaterial::pvdf(), 4);
  HomogenizeOptions opt;
  opt.jobs = 4;
  const EffectiveMatrix em = build_secant_matrix(sys, 0.01, opt);
  const FullCharacterization fc = characterize(sys, 0.01, opt);
  const Eigen::Matrix<bool, 9, 9> pattern = secant_pattern();
  const double mx = fc.d.cwiseAbs().maxCoeff();
  double off = 0.0, off_secant = 0.0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j)
      if (!pattern(i, j)) {
        off = std::max(off, std::abs(fc.d(i, j)) / mx);
        off_secant = std::max(off_secant, std::abs(em.d(i, j)) / mx);
      }
  const double c11_c22 = rel(em.d(1, 1), em.d(0, 0));
  std::ostringstream o;
  o << "off-pattern max/|D| " << off << " (full 9x9 characterization), slot C11 = C22 to " << c11_c22
    << "; physical cross-section pair C11 " << fc.d(0, 0) << " vs C33 " << fc.d(2, 2) << ", along the fiber "
    << fc.d(1, 1);
  return {!em.partial && !fc.partial && off < 1e-8 && off_secant < 1e-8 && c11_c22 < 1e-6, o.str()};
}

// 8 ------------------------------------------------------------------------
Outcome asymmetry() {
  const RveMesh m = generate_fiber_rve(MeshParams());
  const RveSystem sys = make_rve_system(m, PiezoMaterial::pvdf(), 4);
  HomogenizeOptions opt;
  opt.jobs = 4;
  const EffectiveMatrix t = build_secant_matrix(sys, 0.1, opt);
  const EffectiveMatrix c = build_secant_matrix(sys, -0.1, opt);
  double best = 0.0;
  std::string which;
  for (std::size_t i = 0; i < 6; ++i) {
    const double r = rel(c.cases[i].value, t.cases[i].value);
    if (r > best) {
      best = r;
      which = coefficient_name(t.cases[i].coefficient);
    }
  }
  const double threshold = 100 * opt.solver.tol;
  std::ostringstream o;
  o << "largest tension/compression difference " << best << " in " << which << " (tension "
    << t.cases[0].value << ", compression " << c.cases[0].value << " for C11bar), threshold " << threshold;
  return {!t.partial && !c.partial && best > threshold, o.str()};
}

// 9 ------------------------------------------------------------------------
Outcome mesh_convergence() {
  auto area_error = [](int c, bool preserving) {
    MeshParams p;
    p.circumferential = c;
    p.axial = 1;
    p.area_preserving = preserving;
    const RveMesh m = generate_fiber_rve(p);
    const double exact = std::numbers::pi * p.fiber_radius * p.fiber_radius * m.cell_size(1);
    return std::abs(m.solid_volume() - exact) / exact;
  };
  const int counts[3] = {16, 32, 64};
  double e[3], raw[3];
  for (int i = 0; i < 3; ++i) {
    e[i] = area_error(counts[i], true);
    raw[i] = area_error(counts[i], false);
  }
  const bool monotone = e[1] <= e[0] + 1e-14 && e[2] <= e[1] + 1e-14;
  const bool raw_monotone = raw[1] < raw[0] && raw[2] < raw[1];
  std::ostringstream o;
  o << "section area error at 16/32/64 divisions " << e[0] << ", " << e[1] << ", " << e[2]
    << "; inscribed polygon " << raw[0] << ", " << raw[1] << ", " << raw[2];
  return {e[0] < 0.01 && monotone && raw_monotone, o.str()};
}

}  // namespace

int main() {
  run(1, "homogenization identity", 10, homogenization_identity);
  run(2, "single-element finite differences", 5, element_fd);
  run(3, "contact closed form", 5, contact_closed_form);
  run(4, "Bezier construction", 5, bezier_construction);
  run(5, "Hill condition", 120, hill_condition);
  run(6, "shell integration", 1, shell_integration);
  run(7, "symmetry class", 600, symmetry_class);
  run(8, "tension/compression asymmetry", 600, asymmetry);
  run(9, "mesh convergence", 60, mesh_convergence);
  return failures == 0 ? 0 : 1;
}
