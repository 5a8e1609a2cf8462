#include "piezohom/material.hpp"

#include <cmath>

namespace piezohom {

PiezoMaterial PiezoMaterial::from_si(double lambda, double mu, const Eigen::Vector3d& d_m_per_v,
                                     const Eigen::Vector3d& perm_rel) {
  PiezoMaterial m;
  m.lambda = lambda;
  m.mu = mu;
  for (int i = 0; i < 3; ++i) {
    m.d3(i) = units::strain_piezo_from_si(d_m_per_v(i));
    m.perm(i) = units::permittivity_from_si(perm_rel(i) * units::vacuum_permittivity);
  }
  m.validate();
  return m;
}

PiezoMaterial PiezoMaterial::pvdf() {
  return from_si(80.3, 58.1, Eigen::Vector3d(20e-12, 3e-12, -35e-12), Eigen::Vector3d::Constant(12.0));
}

void PiezoMaterial::validate() const {
  if (!(mu > 0.0)) throw Error("material: mu must be positive");
  if (!(lambda + 2.0 * mu / 3.0 > 0.0)) throw Error("material: bulk modulus lambda + 2mu/3 must be positive");
  for (int i = 0; i < 3; ++i) {
    if (!(perm(i) > 0.0)) throw Error("material: permittivities must be positive");
    if (!std::isfinite(d3(i))) throw Error("material: piezoelectric coefficients must be finite");
  }
}

Eigen::Vector3d stress_piezo_from_strain_piezo(const PiezoMaterial& mat) {
  const Eigen::Matrix3d c = elasticity_block<double>(mat).topLeftCorner<3, 3>();
  return c.transpose() * mat.d3;
}

}  // namespace piezohom
