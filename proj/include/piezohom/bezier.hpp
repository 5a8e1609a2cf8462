#pragma once

#include "piezohom/types.hpp"

#include <array>
#include <vector>

namespace piezohom {

inline constexpr double kDefaultBezierBeta = 2.0 / 3.0;

/// Cubic Bernstein polynomials and their first three derivatives at t.
struct Bernstein3 {
  Eigen::Vector4d b, db, d2b, d3b;
};
Bernstein3 bernstein3(double t);

/// 4x3 map from three consecutive grid points to the four control points
/// along one parametric direction:
///   c1 = (p1+p2)/2, c2 = (1-b)/2 (p1+p2) + b p2,
///   c3 = (1-b)/2 (p2+p3) + b p2, c4 = (p2+p3)/2.
Eigen::Matrix<double, 4, 3> bezier_transfer(double beta);

/// Bicubic patch built from a 3x3 grid of master nodes (index 3i+j, i along
/// zeta1). Control point k,l is stored at index 4k+l.
struct BezierPatch {
  Eigen::Matrix<double, 16, 3> control_points;
  Eigen::Matrix<double, 16, 1> control_potentials;
  double beta = kDefaultBezierBeta;
  std::array<Index, 9> source_nodes{};
};

BezierPatch build_bezier9(const Eigen::Matrix<double, 9, 3>& grid, const Eigen::Matrix<double, 9, 1>& potentials,
                          double beta = kDefaultBezierBeta);

struct SurfacePoint {
  Vec3 x;
  double phi = 0.0;
  Vec3 t1, t2;
  Vec3 normal;  ///< unit, along t1 x t2
};

/// Point, potential, tangents and unit normal at zeta in [0,1]^2.
SurfacePoint surface_eval(const BezierPatch& patch, const Eigen::Vector2d& zeta);

/// One parametric direction of a patch in weight form: the stencil slots
/// (centre-1, centre, centre+1) expressed through the grid lines actually
/// used. At a grid end the missing line is the linear extrapolation
/// 2 p0 - p1.
struct Stencil1D {
  std::vector<Index> lines;
  Eigen::Matrix<double, 3, Eigen::Dynamic> slots;  ///< slots(s, k): weight of lines[k] in slot s
};
Stencil1D make_stencil(Index centre, Index count);

/// Weights of the used grid lines and their derivatives up to third order.
struct LineWeights {
  Eigen::VectorXd w, dw, d2w, d3w;
};
LineWeights line_weights(const Stencil1D& s, const Eigen::Matrix<double, 4, 3>& transfer, double t);

}  // namespace piezohom
