#include "piezohom/bezier.hpp"

#include <algorithm>

namespace piezohom {

Bernstein3 bernstein3(double t) {
  const double s = 1.0 - t;
  Bernstein3 out;
  out.b << s * s * s, 3 * t * s * s, 3 * t * t * s, t * t * t;
  out.db << -3 * s * s, 3 * s * s - 6 * t * s, 6 * t * s - 3 * t * t, 3 * t * t;
  out.d2b << 6 * s, -12 * s + 6 * t, 6 * s - 12 * t, 6 * t;
  out.d3b << -6, 18, -18, 6;
  return out;
}

Eigen::Matrix<double, 4, 3> bezier_transfer(double beta) {
  const double h = 0.5 * (1.0 - beta);
  Eigen::Matrix<double, 4, 3> t;
  t << 0.5, 0.5, 0.0,  //
      h, h + beta, 0.0,  //
      0.0, h + beta, h,  //
      0.0, 0.5, 0.5;
  return t;
}

BezierPatch build_bezier9(const Eigen::Matrix<double, 9, 3>& grid, const Eigen::Matrix<double, 9, 1>& potentials,
                          double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error("bezier: beta must lie in [0, 1]");
  const double scale = (grid.colwise().maxCoeff() - grid.colwise().minCoeff()).norm();
  for (int a = 0; a < 9; ++a)
    for (int b = 0; b < a; ++b)
      if ((grid.row(a) - grid.row(b)).norm() <= 1e-12 * scale) throw Error("bezier: repeated master node in 3x3 grid");

  const Eigen::Matrix<double, 4, 3> t = bezier_transfer(beta);
  BezierPatch p;
  p.beta = beta;
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) {
      Eigen::RowVector3d x = Eigen::RowVector3d::Zero();
      double f = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          x += t(k, i) * t(l, j) * grid.row(3 * i + j);
          f += t(k, i) * t(l, j) * potentials(3 * i + j);
        }
      p.control_points.row(4 * k + l) = x;
      p.control_potentials(4 * k + l) = f;
    }
  return p;
}

SurfacePoint surface_eval(const BezierPatch& patch, const Eigen::Vector2d& zeta) {
  const Bernstein3 u = bernstein3(zeta(0));
  const Bernstein3 v = bernstein3(zeta(1));
  SurfacePoint s;
  s.x.setZero();
  s.t1.setZero();
  s.t2.setZero();
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) {
      const Vec3 d = patch.control_points.row(4 * k + l).transpose();
      s.x += u.b(k) * v.b(l) * d;
      s.t1 += u.db(k) * v.b(l) * d;
      s.t2 += u.b(k) * v.db(l) * d;
      s.phi += u.b(k) * v.b(l) * patch.control_potentials(4 * k + l);
    }
  const Vec3 n = s.t1.cross(s.t2);
  const double len = n.norm();
  if (!(len > 1e-14 * (s.t1.squaredNorm() + s.t2.squaredNorm())))
    throw Error("bezier: degenerate tangent plane");
  s.normal = n / len;
  return s;
}

Stencil1D make_stencil(Index centre, Index count) {
  if (count < 2) throw Error("bezier: a master grid needs at least 2 lines per direction");
  if (centre < 0 || centre >= count) throw Error("bezier: stencil centre out of range");
  Stencil1D s;
  const Index lo = std::max<Index>(0, centre - 1);
  const Index hi = std::min<Index>(count - 1, centre + 1);
  for (Index k = lo; k <= hi; ++k) s.lines.push_back(k);
  const Index n = static_cast<Index>(s.lines.size());
  s.slots = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, n);
  auto col = [&](Index line) { return line - lo; };
  for (int slot = 0; slot < 3; ++slot) {
    const Index line = centre - 1 + slot;
    if (line < 0) {
      s.slots(slot, col(0)) = 2.0;
      s.slots(slot, col(1)) = -1.0;
    } else if (line >= count) {
      s.slots(slot, col(count - 1)) = 2.0;
      s.slots(slot, col(count - 2)) = -1.0;
    } else {
      s.slots(slot, col(line)) = 1.0;
    }
  }
  return s;
}

LineWeights line_weights(const Stencil1D& s, const Eigen::Matrix<double, 4, 3>& transfer, double t) {
  const Bernstein3 b = bernstein3(t);
  const Eigen::MatrixXd m = s.slots.transpose() * transfer.transpose();  // lines x 4
  LineWeights w;
  w.w = m * b.b;
  w.dw = m * b.db;
  w.d2w = m * b.d2b;
  w.d3w = m * b.d3b;
  return w;
}

}  // namespace piezohom
