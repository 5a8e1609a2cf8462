#pragma once

#include "piezohom/types.hpp"
#include "piezohom/units.hpp"

namespace piezohom {

/// Linear piezoelastic material with isotropic elasticity and poling along
/// the 3-axis. All fields are stored in internal units (see units.hpp).
struct PiezoMaterial {
  double lambda = 0.0;         ///< Lame constant, MPa.
  double mu = 0.0;             ///< Shear modulus, MPa.
  Eigen::Vector3d d3 = Eigen::Vector3d::Zero();    ///< d31, d32, d33 (internal).
  Eigen::Vector3d perm = Eigen::Vector3d::Zero();  ///< permittivities e11, e22, e33 (internal).

  /// Build from SI inputs: Lame constants in N/mm^2, d in m/V and relative
  /// permittivities (multiples of the vacuum permittivity).
  static PiezoMaterial from_si(double lambda, double mu, const Eigen::Vector3d& d_m_per_v,
                               const Eigen::Vector3d& perm_rel);

  /// PVDF parameters used throughout the examples and acceptance suite.
  static PiezoMaterial pvdf();

  /// Young's modulus implied by lambda and mu.
  double youngs_modulus() const { return mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu); }

  /// Throws Error if the parameters violate positivity requirements.
  void validate() const;
};

/// 6x6 isotropic elasticity block in Voigt form (engineering shear).
template <typename Scalar = double>
Eigen::Matrix<Scalar, 6, 6> elasticity_block(const PiezoMaterial& mat) {
  Eigen::Matrix<Scalar, 6, 6> c = Eigen::Matrix<Scalar, 6, 6>::Zero();
  const Scalar lam(mat.lambda);
  const Scalar mu(mat.mu);
  c.template topLeftCorner<3, 3>().setConstant(lam);
  for (int i = 0; i < 3; ++i) {
    c(i, i) = lam + Scalar(2) * mu;
    c(i + 3, i + 3) = mu;
  }
  return c;
}

/// Piezoelectric stress coefficients e_3j = sum_k d_3k C_kj, j = 1..3.
/// Shear couplings are zero for this material class.
Eigen::Vector3d stress_piezo_from_strain_piezo(const PiezoMaterial& mat);

/// 9x9 microscale constitutive matrix
///
///   [ S ]   [  C   -e^T ] [ E  ]
///   [ D ] = [  e    eps ] [ El ]
///
/// with the sparsity of the PVDF matrix: isotropic elastic block, coupling
/// only through the poling column/row, diagonal permittivity.
template <typename Scalar = double>
Mat9T<Scalar> micro_constitutive_matrix(const PiezoMaterial& mat) {
  Mat9T<Scalar> d = Mat9T<Scalar>::Zero();
  d.template topLeftCorner<6, 6>() = elasticity_block<Scalar>(mat);
  const Eigen::Vector3d e = stress_piezo_from_strain_piezo(mat);
  for (int j = 0; j < 3; ++j) {
    d(j, kEl3) = Scalar(-e(j));
    d(kEl3, j) = Scalar(e(j));
    d(kEl1 + j, kEl1 + j) = Scalar(mat.perm(j));
  }
  return d;
}

/// Sign matrix J = diag(+1 x6, -1 x3). A piezoelectric constitutive matrix
/// satisfies D = J D^T J.
inline Mat9 coupling_sign_matrix() {
  Vec9 s;
  s << 1, 1, 1, 1, 1, 1, -1, -1, -1;
  return s.asDiagonal();
}

}  // namespace piezohom
