#include "piezohom/contact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace piezohom {

void PenaltyParams::validate() const {
  if (!(rho_mech > 0.0)) throw Error("contact: penalty_mech must be positive");
  if (!(rho_el > 0.0)) throw Error("contact: penalty_el must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error("contact: beta must lie in [0, 1]");
  if (!(projection_tol > 0.0)) throw Error("contact: projection_tol must be positive");
  if (max_projection_iter < 1) throw Error("contact: max_projection_iter must be >= 1");
  if (!(hysteresis >= 0.0)) throw Error("contact: hysteresis must be non-negative");
}

PenaltyParams default_penalty(const PiezoMaterial& mat, double length) {
  PenaltyParams p;
  p.rho_mech = 100.0 * mat.youngs_modulus() / length;
  p.rho_el = 100.0 * mat.perm(2) / length;
  return p;
}

namespace {

/// Current patch geometry at zeta.
struct PatchGeometry {
  PatchWeights w;
  Eigen::MatrixXd xm;  ///< n x 3 node positions
  Eigen::VectorXd pm;  ///< n potentials
  Vec3 x;
  std::array<Vec3, 2> a;
  std::array<std::array<Vec3, 2>, 2> x2;
  std::array<std::array<std::array<Vec3, 2>, 2>, 2> x3;
};

PatchGeometry patch_geometry(const ContactInterface& iface, Index patch, const Eigen::Vector2d& zeta,
                             const NodeCoords& x, const Eigen::VectorXd& phi) {
  PatchGeometry g;
  g.w = patch_weights(iface, patch, zeta);
  const Index n = static_cast<Index>(g.w.nodes.size());
  g.xm.resize(n, 3);
  g.pm.resize(n);
  for (Index k = 0; k < n; ++k) {
    g.xm.row(k) = x.row(g.w.nodes[k]);
    g.pm(k) = phi.size() ? phi(g.w.nodes[k]) : 0.0;
  }
  g.x = g.xm.transpose() * g.w.m;
  for (int a = 0; a < 2; ++a) {
    g.a[a] = g.xm.transpose() * g.w.d1[a];
    for (int b = 0; b < 2; ++b) {
      g.x2[a][b] = g.xm.transpose() * g.w.d2[a][b];
      for (int c = 0; c < 2; ++c) g.x3[a][b][c] = g.xm.transpose() * g.w.d3[a][b][c];
    }
  }
  return g;
}

}  // namespace

ContactInterface make_contact_interface(const Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>& master_grid,
                                        std::vector<Index> slave_nodes, std::vector<double> slave_areas,
                                        const NodeCoords& reference, const std::function<Vec3(const Vec3&)>& outward,
                                        double length_scale, double beta) {
  if (master_grid.rows() < 2 || master_grid.cols() < 2)
    throw Error("contact: master grid needs at least 2 x 2 nodes");
  if (slave_nodes.size() != slave_areas.size()) throw Error("contact: one lumped area per slave node required");
  ContactInterface iface;
  iface.master_grid = master_grid;
  iface.slave_nodes = std::move(slave_nodes);
  iface.slave_areas = std::move(slave_areas);
  iface.length_scale = length_scale;
  iface.beta = beta;
  iface.patch_sign.assign(static_cast<std::size_t>(master_grid.size()), 1.0);
  for (Index p = 0; p < iface.num_patches(); ++p) {
    const PatchGeometry g = patch_geometry(iface, p, Eigen::Vector2d(0.5, 0.5), reference, Eigen::VectorXd());
    const Vec3 n = g.a[0].cross(g.a[1]);
    if (n.norm() == 0.0) throw Error("contact: degenerate master patch");
    iface.patch_sign[static_cast<std::size_t>(p)] = n.dot(outward(g.x)) >= 0.0 ? 1.0 : -1.0;
  }
  return iface;
}

ContactInterface fiber_contact_interface(const RveMesh& mesh, const ContactSurface& surface, double beta) {
  const Eigen::Vector2d c = mesh.fibers.at(static_cast<std::size_t>(surface.master_fiber)).center;
  auto outward = [c](const Vec3& x) { return Vec3(x(0) - c(0), 0.0, x(2) - c(1)); };
  return make_contact_interface(surface.master_grid, surface.slave_nodes, surface.slave_areas, mesh.nodes, outward,
                                mesh.rve_edge(), beta);
}

PatchWeights patch_weights(const ContactInterface& iface, Index patch, const Eigen::Vector2d& zeta) {
  const Index nc = iface.master_grid.cols();
  const Index row = patch / nc;
  const Index col = patch % nc;
  const Stencil1D s1 = make_stencil(row, iface.master_grid.rows());
  const Stencil1D s2 = make_stencil(col, nc);
  const Eigen::Matrix<double, 4, 3> t = bezier_transfer(iface.beta);
  const LineWeights a = line_weights(s1, t, zeta(0));
  const LineWeights b = line_weights(s2, t, zeta(1));
  const std::array<const Eigen::VectorXd*, 4> da = {&a.w, &a.dw, &a.d2w, &a.d3w};
  const std::array<const Eigen::VectorXd*, 4> db = {&b.w, &b.dw, &b.d2w, &b.d3w};

  const Index n1 = static_cast<Index>(s1.lines.size());
  const Index n2 = static_cast<Index>(s2.lines.size());
  PatchWeights w;
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n2; ++j) w.nodes.push_back(iface.master_grid(s1.lines[i], s2.lines[j]));
  auto outer = [&](int p1, int p2) {
    Eigen::VectorXd v(n1 * n2);
    for (Index i = 0; i < n1; ++i)
      for (Index j = 0; j < n2; ++j) v(i * n2 + j) = (*da[p1])(i) * (*db[p2])(j);
    return v;
  };
  w.m = outer(0, 0);
  for (int p = 0; p < 2; ++p) {
    w.d1[p] = outer(p == 0, p == 1);
    for (int q = 0; q < 2; ++q) {
      w.d2[p][q] = outer((p == 0) + (q == 0), (p == 1) + (q == 1));
      for (int r = 0; r < 2; ++r)
        w.d3[p][q][r] = outer((p == 0) + (q == 0) + (r == 0), (p == 1) + (q == 1) + (r == 1));
    }
  }
  return w;
}

BezierPatch interface_patch(const ContactInterface& iface, Index patch, const NodeCoords& x,
                            const Eigen::VectorXd& phi) {
  const Index nc = iface.master_grid.cols();
  const Index row = patch / nc;
  const Index col = patch % nc;
  const Stencil1D s1 = make_stencil(row, iface.master_grid.rows());
  const Stencil1D s2 = make_stencil(col, nc);
  Eigen::Matrix<double, 9, 3> grid = Eigen::Matrix<double, 9, 3>::Zero();
  Eigen::Matrix<double, 9, 1> pot = Eigen::Matrix<double, 9, 1>::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (Index a = 0; a < s1.slots.cols(); ++a)
        for (Index b = 0; b < s2.slots.cols(); ++b) {
          const double w = s1.slots(i, a) * s2.slots(j, b);
          if (w == 0.0) continue;
          const Index node = iface.master_grid(s1.lines[a], s2.lines[b]);
          grid.row(3 * i + j) += w * x.row(node);
          if (phi.size()) pot(3 * i + j) += w * phi(node);
        }
  BezierPatch p = build_bezier9(grid, pot, iface.beta);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Index r = std::clamp<Index>(row - 1 + i, 0, iface.master_grid.rows() - 1);
      const Index c = std::clamp<Index>(col - 1 + j, 0, nc - 1);
      p.source_nodes[static_cast<std::size_t>(3 * i + j)] = iface.master_grid(r, c);
    }
  return p;
}

ContactPair closest_point_projection(const ContactInterface& iface, Index slave_local, const NodeCoords& x,
                                     const Eigen::VectorXd& phi, const PenaltyParams& params, Index patch_hint) {
  ContactPair pair;
  pair.slave_local = slave_local;
  pair.slave = iface.slave_nodes.at(static_cast<std::size_t>(slave_local));
  const Vec3 xs = x.row(pair.slave).transpose();
  const Index nr = iface.master_grid.rows();
  const Index nc = iface.master_grid.cols();

  Index patch = patch_hint;
  if (patch < 0 || patch >= iface.num_patches()) {
    double best = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < nr; ++r)
      for (Index c = 0; c < nc; ++c) {
        const double d = (x.row(iface.master_grid(r, c)).transpose() - xs).squaredNorm();
        if (d < best) {
          best = d;
          patch = iface.patch_index(r, c);
        }
      }
  }

  const double tol = params.projection_tol * iface.length_scale;
  const double edge = 1e-8;
  Eigen::Vector2d zeta(0.5, 0.5);
  for (int hop = 0; hop < 2 * (nr + nc); ++hop) {
    bool converged = false;
    for (int it = 0; it < params.max_projection_iter; ++it) {
      const PatchGeometry g = patch_geometry(iface, patch, zeta, x, phi);
      const Vec3 r = xs - g.x;
      Eigen::Vector2d f(r.dot(g.a[0]), r.dot(g.a[1]));
      ++pair.iterations;
      if (std::abs(f(0)) <= tol * g.a[0].norm() && std::abs(f(1)) <= tol * g.a[1].norm()) {
        converged = true;
        break;
      }
      Eigen::Matrix2d fz;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) fz(a, b) = -g.a[a].dot(g.a[b]) + r.dot(g.x2[a][b]);
      Eigen::Vector2d step = -fz.fullPivLu().solve(f);
      if (!step.allFinite()) break;
      if (step.norm() > 0.5) step *= 0.5 / step.norm();
      zeta += step;
    }
    if (!converged) return pair;

    Index dr = 0, dc = 0;
    if (zeta(0) < -edge) dr = -1;
    if (zeta(0) > 1.0 + edge) dr = 1;
    if (zeta(1) < -edge) dc = -1;
    if (zeta(1) > 1.0 + edge) dc = 1;
    if (dr == 0 && dc == 0) {
      const PatchGeometry g = patch_geometry(iface, patch, zeta, x, phi);
      const double sign = iface.patch_sign[static_cast<std::size_t>(patch)];
      pair.patch = patch;
      pair.zeta = zeta;
      pair.closest = g.x;
      pair.normal = sign * g.a[0].cross(g.a[1]).normalized();
      pair.g_n = (xs - g.x).dot(pair.normal);
      pair.g_phi = (phi.size() ? phi(pair.slave) : 0.0) - g.pm.dot(g.w.m);
      pair.projected = true;
      return pair;
    }
    const Index row = patch / nc + dr;
    const Index col = patch % nc + dc;
    if (row < 0 || row >= nr || col < 0 || col >= nc) return pair;
    patch = iface.patch_index(row, col);
    zeta(0) = std::clamp(zeta(0) - double(dr), 0.0, 1.0);
    zeta(1) = std::clamp(zeta(1) - double(dc), 0.0, 1.0);
  }
  return pair;
}

ContactContribution contact_contribution(const ContactInterface& iface, const ContactPair& pair, const NodeCoords& x,
                                         const Eigen::VectorXd& phi, const PenaltyParams& params) {
  if (!pair.projected) throw Error("contact: contribution requested for an unprojected pair");
  const PatchGeometry g = patch_geometry(iface, pair.patch, pair.zeta, x, phi);
  const Index n = static_cast<Index>(g.w.nodes.size());
  const Index nd = kDofsPerNode * (n + 1);
  const double area = iface.slave_areas[static_cast<std::size_t>(pair.slave_local)];
  const double k = params.rho_mech * area;
  const double ke = params.rho_el * area;

  ContactContribution out;
  out.nodes.push_back(pair.slave);
  out.nodes.insert(out.nodes.end(), g.w.nodes.begin(), g.w.nodes.end());

  const Vec3 xs = x.row(pair.slave).transpose();
  const Vec3 r = xs - g.x;

  // partial derivatives with respect to the local dofs at fixed zeta
  auto master_block = [&](const Eigen::VectorXd& weights, double scale) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, nd);
    for (Index a = 0; a < n; ++a) m.block<3, 3>(0, kDofsPerNode * (a + 1)) = scale * weights(a) * Mat3::Identity();
    return m;
  };
  Eigen::MatrixXd rq = master_block(g.w.m, -1.0);
  rq.block<3, 3>(0, 0) = Mat3::Identity();
  std::array<Eigen::MatrixXd, 2> aq, rqb;
  std::array<std::array<Eigen::MatrixXd, 2>, 2> aqb;
  for (int a = 0; a < 2; ++a) {
    aq[a] = master_block(g.w.d1[a], 1.0);
    rqb[a] = master_block(g.w.d1[a], -1.0);
    for (int b = 0; b < 2; ++b) aqb[a][b] = master_block(g.w.d2[a][b], 1.0);
  }

  Eigen::Matrix2d fz;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) fz(a, b) = -g.a[a].dot(g.a[b]) + r.dot(g.x2[a][b]);
  const Eigen::Matrix2d fz_inv = fz.inverse();
  Eigen::MatrixXd fq(2, nd);
  for (int a = 0; a < 2; ++a) fq.row(a) = g.a[a].transpose() * rq + r.transpose() * aq[a];
  const Eigen::MatrixXd zq = -fz_inv * fq;  // d zeta / dq

  out.energy_mech = 0.5 * k * r.squaredNorm();
  out.residual = k * rq.transpose() * r;
  out.stiffness = k * (rq.transpose() * rq + fq.transpose() * fz_inv * fq);

  if (ke != 0.0) {
    const double gphi = (phi.size() ? phi(pair.slave) : 0.0) - g.pm.dot(g.w.m);
    Eigen::VectorXd gq = Eigen::VectorXd::Zero(nd);
    gq(3) = 1.0;
    std::array<Eigen::VectorXd, 2> v;
    std::array<double, 2> gz{};
    std::array<std::array<double, 2>, 2> gzz{};
    for (Index a = 0; a < n; ++a) gq(kDofsPerNode * (a + 1) + 3) = -g.w.m(a);
    for (int a = 0; a < 2; ++a) {
      v[a] = Eigen::VectorXd::Zero(nd);
      for (Index m = 0; m < n; ++m) v[a](kDofsPerNode * (m + 1) + 3) = -g.w.d1[a](m);
      gz[a] = -g.pm.dot(g.w.d1[a]);
      for (int b = 0; b < 2; ++b) gzz[a][b] = -g.pm.dot(g.w.d2[a][b]);
    }
    Eigen::VectorXd dg = gq;
    for (int a = 0; a < 2; ++a) dg += gz[a] * zq.row(a).transpose();

    // second derivatives of zeta(q) from the projection condition F(zeta(q), q) = 0
    std::array<Eigen::MatrixXd, 2> t;
    for (int a = 0; a < 2; ++a) {
      t[a] = rq.transpose() * aq[a] + aq[a].transpose() * rq;
      for (int b = 0; b < 2; ++b) {
        const Eigen::VectorXd fqz = (g.x2[a][b].transpose() * rq + g.a[a].transpose() * rqb[b] -
                                     g.a[b].transpose() * aq[a] + r.transpose() * aqb[a][b])
                                        .transpose();
        const Eigen::VectorXd zb = zq.row(b).transpose();
        t[a] += fqz * zb.transpose() + zb * fqz.transpose();
        for (int c = 0; c < 2; ++c) {
          const double fzzz = -g.x2[a][c].dot(g.a[b]) - g.a[a].dot(g.x2[b][c]) - g.a[c].dot(g.x2[a][b]) +
                              r.dot(g.x3[a][b][c]);
          t[a] += fzzz * zb * zq.row(c);
        }
      }
    }
    Eigen::MatrixXd d2g = Eigen::MatrixXd::Zero(nd, nd);
    for (int a = 0; a < 2; ++a) {
      const Eigen::VectorXd za = zq.row(a).transpose();
      d2g += v[a] * za.transpose() + za * v[a].transpose();
      for (int b = 0; b < 2; ++b) d2g += gzz[a][b] * za * zq.row(b);
      const Eigen::MatrixXd zqq = -(fz_inv(a, 0) * t[0] + fz_inv(a, 1) * t[1]);
      d2g += gz[a] * zqq;
    }
    out.energy_el = -0.5 * ke * gphi * gphi;
    out.residual += -ke * gphi * dg;
    out.stiffness += -ke * (dg * dg.transpose() + gphi * d2g);
  }
  return out;
}

}  // namespace piezohom
