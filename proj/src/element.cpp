#include "piezohom/element.hpp"

#include <cmath>
#include <sstream>

namespace piezohom {

const std::array<Vec3, 8>& gauss_points_2x2x2() {
  static const std::array<Vec3, 8> pts = [] {
    const double g = 1.0 / std::sqrt(3.0);
    std::array<Vec3, 8> p;
    const auto& ref = brick_reference_nodes();
    for (int a = 0; a < 8; ++a) p[a] = g * ref.row(a).transpose();
    return p;
  }();
  return pts;
}

SpatialGradients spatial_gradients(const Eigen::Matrix<double, 8, 3>& coords, const Vec3& xi) {
  const ShapeEval<double> s = shape_eval<double>(xi);
  // J_ij = dx_j / dxi_i
  const Mat3 jac = s.gradients.transpose() * coords;
  SpatialGradients out;
  out.det_j = jac.determinant();
  const double scale = std::pow(std::abs(coords.colwise().maxCoeff().maxCoeff() -
                                         coords.colwise().minCoeff().minCoeff()) + 1e-300,
                                3);
  if (!(out.det_j > 1e-14 * scale)) {
    std::ostringstream msg;
    msg << "element: non-positive Jacobian determinant " << out.det_j;
    throw Error(msg.str());
  }
  out.dN = s.gradients * jac.inverse().transpose();
  out.N = s.values;
  return out;
}

Eigen::Matrix<double, 9, 32> generalized_strain_operator(const Eigen::Matrix<double, 8, 3>& dN) {
  Eigen::Matrix<double, 9, 32> b = Eigen::Matrix<double, 9, 32>::Zero();
  for (int a = 0; a < 8; ++a) {
    const int c = 4 * a;
    b(kE11, c + 0) = dN(a, 0);
    b(kE22, c + 1) = dN(a, 1);
    b(kE33, c + 2) = dN(a, 2);
    b(kE12, c + 0) = dN(a, 1);
    b(kE12, c + 1) = dN(a, 0);
    b(kE13, c + 0) = dN(a, 2);
    b(kE13, c + 2) = dN(a, 0);
    b(kE23, c + 1) = dN(a, 2);
    b(kE23, c + 2) = dN(a, 1);
    b(kEl1, c + 3) = -dN(a, 0);
    b(kEl2, c + 3) = -dN(a, 1);
    b(kEl3, c + 3) = -dN(a, 2);
  }
  return b;
}

namespace {

template <typename Scalar>
Eigen::Matrix<int, 24, 1> u_rows() {
  Eigen::Matrix<int, 24, 1> r;
  for (int a = 0; a < 8; ++a)
    for (int k = 0; k < 3; ++k) r(3 * a + k) = 4 * a + k;
  return r;
}

}  // namespace

template <typename Scalar>
Eigen::Matrix<Scalar, 24, 1> ElementResult<Scalar>::residual_u() const {
  const auto r = u_rows<Scalar>();
  Eigen::Matrix<Scalar, 24, 1> out;
  for (int i = 0; i < 24; ++i) out(i) = residual(r(i));
  return out;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 8, 1> ElementResult<Scalar>::residual_phi() const {
  Eigen::Matrix<Scalar, 8, 1> out;
  for (int a = 0; a < 8; ++a) out(a) = residual(4 * a + 3);
  return out;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 24, 24> ElementResult<Scalar>::k_uu() const {
  const auto r = u_rows<Scalar>();
  Eigen::Matrix<Scalar, 24, 24> out;
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j) out(i, j) = stiffness(r(i), r(j));
  return out;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 24, 8> ElementResult<Scalar>::k_uphi() const {
  const auto r = u_rows<Scalar>();
  Eigen::Matrix<Scalar, 24, 8> out;
  for (int i = 0; i < 24; ++i)
    for (int b = 0; b < 8; ++b) out(i, b) = stiffness(r(i), 4 * b + 3);
  return out;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 8, 24> ElementResult<Scalar>::k_phiu() const {
  const auto r = u_rows<Scalar>();
  Eigen::Matrix<Scalar, 8, 24> out;
  for (int a = 0; a < 8; ++a)
    for (int j = 0; j < 24; ++j) out(a, j) = stiffness(4 * a + 3, r(j));
  return out;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 8, 8> ElementResult<Scalar>::k_phiphi() const {
  Eigen::Matrix<Scalar, 8, 8> out;
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) out(a, b) = stiffness(4 * a + 3, 4 * b + 3);
  return out;
}

template struct ElementResult<double>;
template struct ElementResult<long double>;

ElementAverages element_averages(const ElementState<double>& state, const Mat9& d) {
  ElementAverages out;
  const ElemVec<double> q = state.dofs();
  for (const Vec3& xi : gauss_points_2x2x2()) {
    const SpatialGradients g = spatial_gradients(state.coords, xi);
    const Vec9 strain = generalized_strain_operator(g.dN) * q;
    const Vec9 stress = d * strain;
    out.volume += g.det_j;
    out.strain_integral += strain * g.det_j;
    out.stress_integral += stress * g.det_j;
    out.work += stress.dot(strain) * g.det_j;
  }
  const SpatialGradients g0 = spatial_gradients(state.coords, Vec3::Zero());
  out.centroid_stress = d * (generalized_strain_operator(g0.dN) * q);
  return out;
}

}  // namespace piezohom
