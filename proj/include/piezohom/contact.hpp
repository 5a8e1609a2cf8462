#pragma once

#include "piezohom/bezier.hpp"
#include "piezohom/material.hpp"
#include "piezohom/mesh.hpp"

#include <functional>
#include <vector>

namespace piezohom {

using NodeCoords = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Penalty regularization of the contact constraints. Both penalties are
/// per unit reference area of the slave surface; each slave node carries its
/// lumped area.
struct PenaltyParams {
  double rho_mech = 0.0;  ///< MPa / um
  double rho_el = 0.0;    ///< internal permittivity / um
  double beta = kDefaultBezierBeta;
  double projection_tol = 1e-10;  ///< orthogonality tolerance, relative to L
  int max_projection_iter = 30;
  double hysteresis = 1e-12;  ///< activation band, relative to L

  void validate() const;
};

/// rho_mech = 100 E / L and rho_el = 100 eps33 / L.
PenaltyParams default_penalty(const PiezoMaterial& mat, double length);

/// Master grid smoothed by one Bezier-9 patch per grid node, plus the slave
/// nodes searched against it.
struct ContactInterface {
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> master_grid;  ///< rows along zeta1, cols along zeta2
  std::vector<Index> slave_nodes;
  std::vector<double> slave_areas;
  std::vector<double> patch_sign;  ///< +1/-1 so that the patch normal points out of the master body
  double length_scale = 1.0;
  double beta = kDefaultBezierBeta;

  Index num_patches() const { return master_grid.size(); }
  Index patch_index(Index row, Index col) const { return row * master_grid.cols() + col; }
};

/// outward(x) is any vector pointing out of the master body near x.
ContactInterface make_contact_interface(const Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>& master_grid,
                                        std::vector<Index> slave_nodes, std::vector<double> slave_areas,
                                        const NodeCoords& reference, const std::function<Vec3(const Vec3&)>& outward,
                                        double length_scale, double beta = kDefaultBezierBeta);

/// Interface between two fibers of an RVE mesh.
ContactInterface fiber_contact_interface(const RveMesh& mesh, const ContactSurface& surface,
                                         double beta = kDefaultBezierBeta);

/// Weights M_m(zeta) of the patch nodes and their derivatives.
struct PatchWeights {
  std::vector<Index> nodes;
  Eigen::VectorXd m;
  std::array<Eigen::VectorXd, 2> d1;
  std::array<std::array<Eigen::VectorXd, 2>, 2> d2;
  std::array<std::array<std::array<Eigen::VectorXd, 2>, 2>, 2> d3;
};
PatchWeights patch_weights(const ContactInterface& iface, Index patch, const Eigen::Vector2d& zeta);

/// The Bezier-9 patch in control-point form (used for inspection and tests).
BezierPatch interface_patch(const ContactInterface& iface, Index patch, const NodeCoords& x, const Eigen::VectorXd& phi);

struct ContactPair {
  Index slave_local = -1;  ///< position in ContactInterface::slave_nodes
  Index slave = -1;        ///< mesh node
  Index patch = -1;
  Eigen::Vector2d zeta = Eigen::Vector2d::Constant(0.5);
  double g_n = 0.0;
  double g_phi = 0.0;
  Vec3 normal = Vec3::Zero();
  Vec3 closest = Vec3::Zero();
  bool projected = false;
  int iterations = 0;
};

/// Closest-point projection of one slave node onto the smoothed master
/// surface, hopping between patches when the parameter leaves [0,1]^2.
ContactPair closest_point_projection(const ContactInterface& iface, Index slave_local, const NodeCoords& x,
                                     const Eigen::VectorXd& phi, const PenaltyParams& params, Index patch_hint = -1);

/// Energy, residual and tangent of one active pair over the slave node
/// followed by the patch nodes, 4 dofs each (u1, u2, u3, phi).
///   mechanical: 1/2 k |x_s - x(zeta)|^2, k = rho_mech * area
///   electric:  -1/2 k_e g_phi^2,        k_e = rho_el * area
struct ContactContribution {
  std::vector<Index> nodes;
  double energy_mech = 0.0;
  double energy_el = 0.0;
  Eigen::VectorXd residual;
  Eigen::MatrixXd stiffness;
  double energy() const { return energy_mech + energy_el; }
};
ContactContribution contact_contribution(const ContactInterface& iface, const ContactPair& pair, const NodeCoords& x,
                                         const Eigen::VectorXd& phi, const PenaltyParams& params);

}  // namespace piezohom
