#include "piezohom/solver.hpp"

#include "piezohom/element.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

namespace piezohom {

void SolverOptions::validate() const {
  if (!(tol > 0.0)) throw Error("solver: tol must be positive");
  if (!(increment_tol > 0.0)) throw Error("solver: increment_tol must be positive");
  if (max_iter < 1) throw Error("solver: max_iter must be >= 1");
  if (max_line_search < 0) throw Error("solver: max_line_search must be >= 0");
  if (max_flips < 1) throw Error("solver: max_flips must be >= 1");
  if (threads < 1) throw Error("solver: threads must be >= 1");
}

Problem make_problem(const RveMesh& mesh, const Mat9& d, ConstraintSet constraints, const PenaltyParams& penalty,
                     bool contact, const Vec9& macro) {
  Problem p;
  p.mesh = &mesh;
  p.d = d;
  p.constraints = std::move(constraints);
  p.penalty = penalty;
  p.macro = macro;
  if (contact)
    for (const ContactSurface& cs : mesh.contact_surfaces) p.contacts.push_back(fiber_contact_interface(mesh, cs, penalty.beta));
  return p;
}

namespace {

Eigen::Matrix<double, 8, 3> element_coords(const RveMesh& mesh, std::size_t e) {
  Eigen::Matrix<double, 8, 3> x;
  for (int a = 0; a < 8; ++a) x.row(a) = mesh.nodes.row(mesh.elements[e][static_cast<std::size_t>(a)]);
  return x;
}

void element_triplets(const RveMesh& mesh, const DofMap& dofs, std::size_t e, const ElemMat<double>& k,
                      std::vector<Eigen::Triplet<double>>& out) {
  std::array<Index, 32> idx{};
  for (int a = 0; a < 8; ++a)
    for (int c = 0; c < kDofsPerNode; ++c)
      idx[static_cast<std::size_t>(kDofsPerNode * a + c)] = dofs.dof(mesh.elements[e][static_cast<std::size_t>(a)], c);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j)
      if (k(i, j) != 0.0) out.emplace_back(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)], k(i, j));
}

template <typename F>
void parallel_for(std::size_t n, int threads, F&& f) {
  const std::size_t nt = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(threads), n));
  if (nt == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = next++; i < n; i = next++) f(i, t);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

BulkOperator assemble_bulk(const RveMesh& mesh, const DofMap& dofs, const Mat9& d, int threads, bool deterministic) {
  BulkOperator op;
  op.num_dofs = dofs.num_dofs();
  const std::size_t ne = mesh.elements.size();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(ne * 32 * 32);

  auto element_k = [&](std::size_t e) {
    ElementState<double> st;
    st.coords = element_coords(mesh, e);
    try {
      return element_integrate(st, d).stiffness;
    } catch (const Error& err) {
      std::ostringstream msg;
      msg << "element " << e << ": " << err.what();
      throw Error(msg.str());
    }
  };

  std::vector<std::string> errors;
  std::mutex mutex;
  if (deterministic) {
    std::vector<ElemMat<double>> ks(ne);
    parallel_for(ne, threads, [&](std::size_t e, std::size_t) {
      try {
        ks[e] = element_k(e);
      } catch (const Error& err) {
        std::lock_guard<std::mutex> lock(mutex);
        errors.emplace_back(err.what());
      }
    });
    if (!errors.empty()) throw Error(errors.front());
    for (std::size_t e = 0; e < ne; ++e) element_triplets(mesh, dofs, e, ks[e], triplets);
  } else {
    // per-thread buffers merged in completion order
    parallel_for(ne, threads, [&](std::size_t e, std::size_t) {
      std::vector<Eigen::Triplet<double>> local;
      try {
        element_triplets(mesh, dofs, e, element_k(e), local);
      } catch (const Error& err) {
        std::lock_guard<std::mutex> lock(mutex);
        errors.emplace_back(err.what());
        return;
      }
      std::lock_guard<std::mutex> lock(mutex);
      triplets.insert(triplets.end(), local.begin(), local.end());
    });
    if (!errors.empty()) throw Error(errors.front());
  }
  op.k.resize(op.num_dofs, op.num_dofs);
  op.k.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

void constraint_rows(const ConstraintSet& set, Index num_dofs, SparseMatrix& c, Eigen::VectorXd& b) {
  std::vector<Eigen::Triplet<double>> t;
  const Index m = set.num_rows();
  b.resize(m);
  Index row = 0;
  for (const PeriodicLink& l : set.links) {
    t.emplace_back(row, l.plus, 1.0);
    t.emplace_back(row, l.minus, -1.0);
    b(row++) = l.offset;
  }
  for (const DirichletEntry& d : set.dirichlet) {
    t.emplace_back(row, d.dof, 1.0);
    b(row++) = d.value;
  }
  c.resize(m, num_dofs);
  c.setFromTriplets(t.begin(), t.end());
}

NodeCoords nodal_displacements(const DofMap& dofs, const Eigen::VectorXd& q) {
  const Index n = static_cast<Index>(dofs.slot.size());
  NodeCoords u(n, 3);
  for (Index i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) u(i, k) = q(dofs.dof(i, k));
  return u;
}

Eigen::VectorXd nodal_potentials(const DofMap& dofs, const Eigen::VectorXd& q) {
  const Index n = static_cast<Index>(dofs.slot.size());
  Eigen::VectorXd phi(n);
  for (Index i = 0; i < n; ++i) phi(i) = q(dofs.dof(i, 3));
  return phi;
}

Eigen::VectorXd affine_dofs(const RveMesh& mesh, const DofMap& dofs, const Vec9& g) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(dofs.num_dofs());
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    if (dofs.representative[static_cast<std::size_t>(i)] != i) continue;
    const Eigen::Vector4d v = affine_value(g, mesh.node(i) - mesh.cell_min);
    for (int k = 0; k < kDofsPerNode; ++k) q(dofs.dof(i, k)) = v(k);
  }
  return q;
}

ContactAssembly assemble_contact(const Problem& p, const std::vector<std::vector<PairState>>& pairs,
                                 const Eigen::VectorXd& q) {
  const DofMap& dofs = p.constraints.dofs;
  ContactAssembly out;
  out.residual = Eigen::VectorXd::Zero(dofs.num_dofs());
  if (p.contacts.empty()) return out;
  const NodeCoords x = p.mesh->nodes + nodal_displacements(dofs, q);
  const Eigen::VectorXd phi = nodal_potentials(dofs, q);
  for (std::size_t i = 0; i < p.contacts.size(); ++i) {
    for (const PairState& ps : pairs[i]) {
      if (!ps.active) continue;
      ++out.active;
      const ContactContribution c = contact_contribution(p.contacts[i], ps.pair, x, phi, p.penalty);
      out.energy_mech += c.energy_mech;
      out.energy_el += c.energy_el;
      std::vector<Index> idx;
      for (Index node : c.nodes)
        for (int k = 0; k < kDofsPerNode; ++k) idx.push_back(dofs.dof(node, k));
      for (std::size_t a = 0; a < idx.size(); ++a) {
        out.residual(idx[a]) += c.residual(static_cast<Index>(a));
        for (std::size_t b = 0; b < idx.size(); ++b) {
          const double v = c.stiffness(static_cast<Index>(a), static_cast<Index>(b));
          if (v != 0.0) out.triplets.emplace_back(idx[a], idx[b], v);
        }
      }
    }
  }
  return out;
}

namespace {

/// Re-projects every slave and updates the active flags; returns the number
/// of status changes.
int update_active_set(const Problem& p, std::vector<std::vector<PairState>>& pairs, const Eigen::VectorXd& q,
                      const SolverOptions& opt) {
  if (p.contacts.empty()) return 0;
  const DofMap& dofs = p.constraints.dofs;
  const NodeCoords x = p.mesh->nodes + nodal_displacements(dofs, q);
  const Eigen::VectorXd phi = nodal_potentials(dofs, q);
  int changes = 0;
  for (std::size_t i = 0; i < p.contacts.size(); ++i) {
    const ContactInterface& iface = p.contacts[i];
    const double band = p.penalty.hysteresis * iface.length_scale;
    for (PairState& ps : pairs[i]) {
      const ContactPair pr = closest_point_projection(iface, ps.pair.slave_local, x, phi, p.penalty, ps.pair.patch);
      bool next = false;
      if (pr.projected) {
        ps.pair = pr;
        next = ps.active ? pr.g_n < band : pr.g_n < -band;
      }
      if (ps.frozen && pr.projected) next = ps.active;
      if (next != ps.active) {
        ++changes;
        ps.active = next;
        if (++ps.flips >= opt.max_flips) ps.frozen = true;
      }
    }
  }
  return changes;
}

struct FieldNorms {
  double u = 0.0;
  double phi = 0.0;
};

FieldNorms field_norms(const Eigen::VectorXd& r) {
  FieldNorms n;
  for (Index i = 0; i < r.size(); ++i) {
    if (i % kDofsPerNode == 3) {
      n.phi += r(i) * r(i);
    } else {
      n.u += r(i) * r(i);
    }
  }
  n.u = std::sqrt(n.u);
  n.phi = std::sqrt(n.phi);
  return n;
}

}  // namespace

Solution newton_solve(const Problem& p, const SolverOptions& opt) {
  const BulkOperator bulk = assemble_bulk(*p.mesh, p.constraints.dofs, p.d, opt.threads, opt.deterministic);
  return newton_solve(p, bulk, opt);
}

Solution newton_solve(const Problem& p, const BulkOperator& bulk, const SolverOptions& opt) {
  opt.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const DofMap& dofs = p.constraints.dofs;
  const Index n = dofs.num_dofs();
  if (bulk.num_dofs != n) throw Error("solver: bulk operator does not match the dof map");

  SparseMatrix c;
  Eigen::VectorXd b;
  constraint_rows(p.constraints, n, c, b);
  const Index m = c.rows();
  const SparseMatrix ct = c.transpose();

  // symmetric diagonal scaling of the dofs, unit row scaling of constraints
  Eigen::VectorXd s(n);
  for (Index i = 0; i < n; ++i) {
    const double kii = std::abs(bulk.k.coeff(i, i));
    s(i) = kii > 0.0 ? 1.0 / std::sqrt(kii) : 1.0;
  }
  Eigen::VectorXd sc = Eigen::VectorXd::Ones(m);
  for (Index k = 0; k < c.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(c, k); it; ++it)
      sc(it.row()) = std::min(sc(it.row()), 1.0 / std::abs(it.value() * s(it.col())));

  Solution sol;
  sol.q = affine_dofs(*p.mesh, dofs, p.macro);
  sol.lambda = Eigen::VectorXd::Zero(m);
  sol.pairs.resize(p.contacts.size());
  for (std::size_t i = 0; i < p.contacts.size(); ++i) {
    sol.pairs[i].resize(p.contacts[i].slave_nodes.size());
    for (std::size_t k = 0; k < sol.pairs[i].size(); ++k) sol.pairs[i][k].pair.slave_local = static_cast<Index>(k);
  }
  int changed = update_active_set(p, sol.pairs, sol.q, opt);
  changed = 0;  // the initial classification is not a change of a converged set

  auto residuals = [&](const Eigen::VectorXd& q, const Eigen::VectorXd& lam, ContactAssembly& ca, Eigen::VectorXd& kq,
                       Eigen::VectorXd& r, Eigen::VectorXd& rc) {
    ca = assemble_contact(p, sol.pairs, q);
    kq = bulk.k * q;
    r = kq + ca.residual + ct * lam;
    rc = c * q - b;
  };
  auto merit = [&](const Eigen::VectorXd& r, const Eigen::VectorXd& rc) {
    return std::sqrt(r.cwiseProduct(s).squaredNorm() + rc.cwiseProduct(sc).squaredNorm());
  };

  const double l = p.mesh->rve_edge();
  double phi_scale = std::max(1e-300, nodal_potentials(dofs, sol.q).cwiseAbs().maxCoeff());
  FieldNorms ref0{-1.0, -1.0};
  bool increment_small = false;

  for (int it = 0;; ++it) {
    ContactAssembly ca;
    Eigen::VectorXd kq, r, rc;
    residuals(sol.q, sol.lambda, ca, kq, r, rc);
    // Jacobi-scaled residuals put both fields in energy units, so a field
    // that carries no load is measured against the loaded one
    const FieldNorms rn = field_norms(r.cwiseProduct(s));
    const FieldNorms fn = field_norms(kq.cwiseProduct(s));
    if (ref0.u < 0.0) ref0 = rn;
    const double ref = std::max({std::hypot(ref0.u, ref0.phi), std::hypot(fn.u, fn.phi), 1e-300});
    const double rel_u = rn.u / ref;
    const double rel_phi = rn.phi / ref;
    const double rel_c = rc.cwiseProduct(sc).norm() / std::max(1.0, b.cwiseProduct(sc).norm());
    sol.report.residual_u.push_back(rel_u);
    sol.report.residual_phi.push_back(rel_phi);
    sol.report.active_counts.push_back(ca.active);

    const bool residual_ok = rel_u <= opt.tol && rel_phi <= opt.tol && rel_c <= opt.tol;
    if (changed == 0 && (residual_ok || (increment_small && rel_c <= opt.tol))) {
      sol.report.converged = true;
      sol.energy_contact_mech = ca.energy_mech;
      sol.energy_contact_el = ca.energy_el;
      sol.contact_force = ca.residual;
      sol.internal_force = kq + ca.residual;
      break;
    }
    if (it >= opt.max_iter) {
      sol.energy_contact_mech = ca.energy_mech;
      sol.energy_contact_el = ca.energy_el;
      sol.contact_force = ca.residual;
      sol.internal_force = kq + ca.residual;
      std::ostringstream msg;
      msg << "no convergence after " << opt.max_iter << " iterations (relative residuals " << rel_u << ", " << rel_phi
          << ")";
      sol.report.message = msg.str();
      break;
    }

    // scaled KKT system
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(bulk.k.nonZeros() + 2 * c.nonZeros()) + ca.triplets.size());
    for (Index k = 0; k < bulk.k.outerSize(); ++k)
      for (SparseMatrix::InnerIterator itk(bulk.k, k); itk; ++itk)
        t.emplace_back(itk.row(), itk.col(), s(itk.row()) * itk.value() * s(itk.col()));
    for (const auto& tr : ca.triplets) t.emplace_back(tr.row(), tr.col(), s(tr.row()) * tr.value() * s(tr.col()));
    for (Index k = 0; k < c.outerSize(); ++k)
      for (SparseMatrix::InnerIterator itc(c, k); itc; ++itc) {
        const double v = sc(itc.row()) * itc.value() * s(itc.col());
        t.emplace_back(n + itc.row(), itc.col(), v);
        t.emplace_back(itc.col(), n + itc.row(), v);
      }
    SparseMatrix kkt(n + m, n + m);
    kkt.setFromTriplets(t.begin(), t.end());
    kkt.makeCompressed();
    Eigen::VectorXd rhs(n + m);
    rhs.head(n) = -r.cwiseProduct(s);
    rhs.tail(m) = -rc.cwiseProduct(sc);

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(kkt);
    if (lu.info() != Eigen::Success)
      throw Error("solver: factorization of the constrained system failed (mechanism or redundant constraints)");
    const Eigen::VectorXd y = lu.solve(rhs);
    if (!y.allFinite() || (kkt * y - rhs).norm() > 1e-6 * std::max(rhs.norm(), 1e-300))
      throw Error("solver: constrained system is singular (mechanism or redundant constraints)");
    const Eigen::VectorXd dq = y.head(n).cwiseProduct(s);
    const Eigen::VectorXd dl = y.tail(m).cwiseProduct(sc);

    // residual-norm line search with the active set frozen
    const double m0 = merit(r, rc);
    double alpha = 1.0;
    Eigen::VectorXd q_new = sol.q + dq;
    Eigen::VectorXd l_new = sol.lambda + dl;
    if (!p.contacts.empty()) {
      for (int cut = 0; cut < opt.max_line_search; ++cut) {
        std::vector<std::vector<PairState>> trial = sol.pairs;
        const NodeCoords x = p.mesh->nodes + nodal_displacements(dofs, q_new);
        const Eigen::VectorXd ph = nodal_potentials(dofs, q_new);
        bool ok = true;
        for (std::size_t i = 0; i < trial.size() && ok; ++i)
          for (PairState& ps : trial[i]) {
            if (!ps.active) continue;
            const ContactPair pr =
                closest_point_projection(p.contacts[i], ps.pair.slave_local, x, ph, p.penalty, ps.pair.patch);
            if (!pr.projected) {
              ok = false;
              break;
            }
            ps.pair = pr;
          }
        if (ok) {
          std::swap(trial, sol.pairs);
          ContactAssembly ct_a;
          Eigen::VectorXd kq_t, r_t, rc_t;
          residuals(q_new, l_new, ct_a, kq_t, r_t, rc_t);
          std::swap(trial, sol.pairs);
          if (merit(r_t, rc_t) <= m0) break;
        }
        alpha *= 0.5;
        q_new = sol.q + alpha * dq;
        l_new = sol.lambda + alpha * dl;
      }
    }
    sol.q = q_new;
    sol.lambda = l_new;
    ++sol.report.iterations;

    double du = 0.0, dphi = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (i % kDofsPerNode == 3) {
        dphi = std::max(dphi, std::abs(alpha * dq(i)));
      } else {
        du = std::max(du, std::abs(alpha * dq(i)));
      }
    }
    phi_scale = std::max(phi_scale, nodal_potentials(dofs, sol.q).cwiseAbs().maxCoeff());
    increment_small = du <= opt.increment_tol * l && dphi <= opt.increment_tol * phi_scale;
    changed = update_active_set(p, sol.pairs, sol.q, opt);
  }

  sol.energy_bulk = 0.5 * sol.q.dot(bulk.k * sol.q);
  sol.report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

}  // namespace piezohom
