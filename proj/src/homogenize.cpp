#include "piezohom/homogenize.hpp"

#include "piezohom/element.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <mutex>
#include <thread>

namespace piezohom {

AveragedState volume_average(const RveMesh& mesh, const DofMap& dofs, const Mat9& d, const Eigen::VectorXd& q,
                             const Vec9& macro) {
  AveragedState avg;
  avg.v_rve = mesh.cell_volume();
  for (const auto& conn : mesh.elements) {
    ElementState<double> st;
    for (int a = 0; a < 8; ++a) {
      const Index n = conn[static_cast<std::size_t>(a)];
      st.coords.row(a) = mesh.nodes.row(n);
      st.u.row(a) = q.segment<3>(dofs.dof(n, 0)).transpose();
      st.phi(a) = q(dofs.dof(n, 3));
    }
    const ElementAverages ea = element_averages(st, d);
    avg.v_solid += ea.volume;
    avg.strain_solid += ea.strain_integral;
    avg.stress += ea.stress_integral;
  }
  avg.strain_solid /= avg.v_rve;
  avg.stress /= avg.v_rve;
  avg.strain = macro;
  avg.v_void = avg.v_rve - avg.v_solid;
  return avg;
}

HillReport hill_check(const Problem& p, const BulkOperator& bulk, const Solution& s, const AveragedState& avg) {
  HillReport h;
  const Mat9 j = coupling_sign_matrix();
  h.macro_work = avg.v_rve * avg.strain.dot(j * avg.stress);
  h.micro_work = s.q.dot(bulk.k * s.q);
  if (s.contact_force.size() == s.q.size()) {
    const Eigen::VectorXd fluct = s.q - affine_dofs(*p.mesh, p.constraints.dofs, p.macro);
    h.contact_work = fluct.dot(s.contact_force);
  }
  const double scale = std::max(std::abs(h.macro_work), std::abs(h.micro_work));
  h.defined = scale > 0.0 && std::abs(h.macro_work) > 1e-14 * scale;
  if (h.defined) {
    h.gap = std::abs(h.macro_work - h.micro_work) / std::abs(h.macro_work);
    h.bookkept = h.contact_work / h.macro_work;
  }
  return h;
}

double extract_coefficient(const LoadCase& lc, const AveragedState& avg) {
  const double den = avg.strain(lc.driver);
  if (!(std::abs(den) > 1e-14)) {
    std::ostringstream msg;
    msg << "homogenize: vanishing driver " << den << " for " << coefficient_name(lc.coefficient);
    throw Error(msg.str());
  }
  return lc.sign * avg.stress(lc.measured) / den;
}

RveSystem make_rve_system(const RveMesh& mesh, const PiezoMaterial& mat, int threads, bool deterministic) {
  mat.validate();
  RveSystem sys;
  sys.mesh = &mesh;
  sys.material = mat;
  sys.d = micro_constitutive_matrix(mat);
  sys.dofs = condense_bonds(mesh.num_nodes(), mesh.bond_pairs);
  sys.bulk = assemble_bulk(mesh, sys.dofs, sys.d, threads, deterministic);
  return sys;
}

namespace {

PenaltyParams penalty_for(const RveSystem& sys, const HomogenizeOptions& opt) {
  return opt.penalty ? *opt.penalty : default_penalty(sys.material, sys.mesh->rve_edge());
}

Problem macro_problem(const RveSystem& sys, const Vec9& macro, const HomogenizeOptions& opt, const LoadCase* lc) {
  ConstraintSet set = lc && opt.mode == BoundaryMode::Faces
                          ? build_face_constraints(*sys.mesh, sys.dofs, *lc, opt.field_scale)
                          : build_periodic_constraints(*sys.mesh, sys.dofs, macro);
  return make_problem(*sys.mesh, sys.d, std::move(set), penalty_for(sys, opt), opt.contact, macro);
}

}  // namespace

Solution solve_macro_state(const RveSystem& sys, const Vec9& macro, const HomogenizeOptions& opt,
                           const LoadCase* faces_case) {
  const Problem p = macro_problem(sys, macro, opt, faces_case);
  return newton_solve(p, sys.bulk, opt.solver);
}

CaseResult run_load_case(const RveSystem& sys, Coefficient c, double amplitude, const HomogenizeOptions& opt) {
  CaseResult r;
  r.coefficient = c;
  r.amplitude = amplitude;
  try {
    const LoadCase lc = build_load_case(c, amplitude);
    const Vec9 macro = lc.macro(opt.field_scale);
    const Problem p = macro_problem(sys, macro, opt, &lc);
    const Solution s = newton_solve(p, sys.bulk, opt.solver);
    r.report = s.report;
    r.average = volume_average(*sys.mesh, sys.dofs, sys.d, s.q, macro);
    r.hill = hill_check(p, sys.bulk, s, r.average);
    r.value = extract_coefficient(lc, r.average);
    r.valid = s.report.converged;
    if (!r.valid) r.error = s.report.message;
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

Mat9 assemble_secant_matrix(const std::array<double, 11>& k) {
  const double c11 = k[0], c12 = k[1], c13 = k[2], c33 = k[3], c44 = k[4], c66 = k[5];
  const double e13 = k[6], e33 = k[7], e15 = k[8], eps11 = k[9], eps33 = k[10];
  Mat9 d = Mat9::Zero();
  d(0, 0) = c11, d(0, 1) = c12, d(0, 2) = c13;
  d(1, 0) = c12, d(1, 1) = c11, d(1, 2) = c13;
  d(2, 0) = c13, d(2, 1) = c13, d(2, 2) = c33;
  d(3, 3) = c44, d(4, 4) = c44, d(5, 5) = c66;
  d(3, 7) = -e15, d(4, 6) = -e15;
  d(6, 4) = e15, d(7, 3) = e15;
  d(6, 6) = eps11, d(7, 7) = eps11, d(8, 8) = eps33;
  d(0, 8) = -e13, d(1, 8) = -e13, d(2, 8) = -e33;
  d(8, 0) = e13, d(8, 1) = e13, d(8, 2) = e33;
  return d;
}

Eigen::Matrix<bool, 9, 9> secant_pattern() {
  std::array<double, 11> ones;
  ones.fill(1.0);
  return assemble_secant_matrix(ones).array() != 0.0;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& f) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

EffectiveMatrix build_secant_matrix(const RveSystem& sys, double amplitude, const HomogenizeOptions& opt) {
  EffectiveMatrix m;
  m.amplitude = amplitude;
  HomogenizeOptions inner = opt;
  if (opt.jobs > 1) inner.solver.threads = 1;
  parallel_for(11, opt.jobs, [&](int i) {
    m.cases[static_cast<std::size_t>(i)] = run_load_case(sys, kAllCoefficients[static_cast<std::size_t>(i)], amplitude, inner);
  });
  std::array<double, 11> k{};
  for (std::size_t i = 0; i < 11; ++i) {
    k[i] = m.cases[i].value;
    if (!m.cases[i].valid) m.partial = true;
  }
  m.d = assemble_secant_matrix(k);
  return m;
}

FullCharacterization characterize(const RveSystem& sys, double amplitude, const HomogenizeOptions& opt) {
  if (!(std::abs(amplitude) > 0.0)) throw Error("homogenize: characterization needs a non-zero amplitude");
  FullCharacterization fc;
  fc.amplitude = amplitude;
  HomogenizeOptions inner = opt;
  inner.mode = BoundaryMode::Periodic;
  if (opt.jobs > 1) inner.solver.threads = 1;
  parallel_for(9, opt.jobs, [&](int j) {
    Vec9 g = Vec9::Zero();
    g(j) = j >= kEl1 ? amplitude * opt.field_scale : amplitude;
    Solution s;
    try {
      s = solve_macro_state(sys, g, inner);
    } catch (const Error& e) {
      fc.reports[static_cast<std::size_t>(j)].message = e.what();
      return;
    }
    fc.reports[static_cast<std::size_t>(j)] = s.report;
    const AveragedState avg = volume_average(*sys.mesh, sys.dofs, sys.d, s.q, g);
    fc.d.col(j) = avg.stress / g(j);
  });
  for (const SolveReport& r : fc.reports)
    if (!r.converged) fc.partial = true;
  return fc;
}

std::vector<double> amplitude_schedule(double lo, double hi, int n, bool both_signs) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw Error("homogenize: amplitude schedule needs 0 < lo <= hi and n >= 1");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : double(i) / double(n - 1);
    out.push_back(lo * std::pow(hi / lo, t));
  }
  if (both_signs)
    for (int i = 0; i < n; ++i) out.push_back(-out[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<EffectiveMatrix> sweep_amplitudes(const RveSystem& sys, const std::vector<double>& schedule,
                                              const HomogenizeOptions& opt) {
  std::vector<EffectiveMatrix> out(schedule.size());
  HomogenizeOptions inner = opt;
  inner.jobs = 1;
  if (opt.jobs > 1) inner.solver.threads = 1;
  parallel_for(static_cast<int>(schedule.size()), opt.jobs,
               [&](int i) { out[static_cast<std::size_t>(i)] = build_secant_matrix(sys, schedule[static_cast<std::size_t>(i)], inner); });
  return out;
}

}  // namespace piezohom
