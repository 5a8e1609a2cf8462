#pragma once

#include "piezohom/types.hpp"

#include <array>

namespace piezohom {

template <typename Scalar> using ElemVec = Eigen::Matrix<Scalar, 32, 1>;
template <typename Scalar> using ElemMat = Eigen::Matrix<Scalar, 32, 32>;

/// Parametric coordinates of the 8 brick nodes.
inline const Eigen::Matrix<double, 8, 3>& brick_reference_nodes() {
  static const Eigen::Matrix<double, 8, 3> ref = [] {
    Eigen::Matrix<double, 8, 3> r;
    r << -1, -1, -1,  //
        1, -1, -1,    //
        1, 1, -1,     //
        -1, 1, -1,    //
        -1, -1, 1,    //
        1, -1, 1,     //
        1, 1, 1,      //
        -1, 1, 1;
    return r;
  }();
  return ref;
}

template <typename Scalar>
struct ShapeEval {
  Eigen::Matrix<Scalar, 8, 1> values;
  Eigen::Matrix<Scalar, 8, 3> gradients;  ///< with respect to the parametric coordinates
};

/// Trilinear shape functions and their parametric gradients.
template <typename Scalar>
ShapeEval<Scalar> shape_eval(const Vec3T<Scalar>& xi) {
  const auto& ref = brick_reference_nodes();
  ShapeEval<Scalar> s;
  for (int a = 0; a < 8; ++a) {
    const Scalar f0 = Scalar(1) + Scalar(ref(a, 0)) * xi(0);
    const Scalar f1 = Scalar(1) + Scalar(ref(a, 1)) * xi(1);
    const Scalar f2 = Scalar(1) + Scalar(ref(a, 2)) * xi(2);
    s.values(a) = f0 * f1 * f2 / Scalar(8);
    s.gradients(a, 0) = Scalar(ref(a, 0)) * f1 * f2 / Scalar(8);
    s.gradients(a, 1) = f0 * Scalar(ref(a, 1)) * f2 / Scalar(8);
    s.gradients(a, 2) = f0 * f1 * Scalar(ref(a, 2)) / Scalar(8);
  }
  return s;
}

/// Nodal coordinates and the coupled nodal unknowns of one brick.
template <typename Scalar = double>
struct ElementState {
  Eigen::Matrix<double, 8, 3> coords = Eigen::Matrix<double, 8, 3>::Zero();
  Eigen::Matrix<Scalar, 8, 3> u = Eigen::Matrix<Scalar, 8, 3>::Zero();
  Eigen::Matrix<Scalar, 8, 1> phi = Eigen::Matrix<Scalar, 8, 1>::Zero();

  /// Node-major (u1, u2, u3, phi) ordering used by the element vectors.
  ElemVec<Scalar> dofs() const {
    ElemVec<Scalar> q;
    for (int a = 0; a < 8; ++a) {
      q.template segment<3>(4 * a) = u.row(a).transpose();
      q(4 * a + 3) = phi(a);
    }
    return q;
  }
  void set_dofs(const ElemVec<Scalar>& q) {
    for (int a = 0; a < 8; ++a) {
      u.row(a) = q.template segment<3>(4 * a).transpose();
      phi(a) = q(4 * a + 3);
    }
  }
};

/// Spatial shape gradients at xi, plus the Jacobian determinant. Throws when
/// the map is singular or inverted.
struct SpatialGradients {
  Eigen::Matrix<double, 8, 3> dN;
  Eigen::Matrix<double, 8, 1> N;
  double det_j = 0.0;
};
SpatialGradients spatial_gradients(const Eigen::Matrix<double, 8, 3>& coords, const Vec3& xi);

/// 9 x 32 generalized strain operator: rows 0-5 the engineering strain of
/// the displacement, rows 6-8 the electric field -grad(phi).
Eigen::Matrix<double, 9, 32> generalized_strain_operator(const Eigen::Matrix<double, 8, 3>& dN);

/// Generalized strain (eps11, eps22, eps33, 2eps12, 2eps13, 2eps23, El1, El2, El3) at xi.
template <typename Scalar>
Vec9T<Scalar> element_strain(const ElementState<Scalar>& state, const Vec3& xi) {
  const SpatialGradients g = spatial_gradients(state.coords, xi);
  return generalized_strain_operator(g.dN).template cast<Scalar>() * state.dofs();
}

/// Energy, residual and tangent of one brick.
template <typename Scalar = double>
struct ElementResult {
  Scalar energy = Scalar(0);
  ElemVec<Scalar> residual = ElemVec<Scalar>::Zero();
  ElemMat<Scalar> stiffness = ElemMat<Scalar>::Zero();

  /// Block views in the (u | phi) partition.
  Eigen::Matrix<Scalar, 24, 1> residual_u() const;
  Eigen::Matrix<Scalar, 8, 1> residual_phi() const;
  Eigen::Matrix<Scalar, 24, 24> k_uu() const;
  Eigen::Matrix<Scalar, 24, 8> k_uphi() const;
  Eigen::Matrix<Scalar, 8, 24> k_phiu() const;
  Eigen::Matrix<Scalar, 8, 8> k_phiphi() const;
};

/// 2x2x2 Gauss points and weights on the reference brick.
const std::array<Vec3, 8>& gauss_points_2x2x2();

/// Hessian of the electric enthalpy density with respect to the generalized
/// strain: J * D with J = diag(1 x6, -1 x3).
inline Mat9 enthalpy_hessian(const Mat9& d) {
  Mat9 h = d;
  h.bottomRows<3>() *= -1.0;
  return h;
}

/// Integrates the enthalpy H = 1/2 eps.C.eps - eps.e^T.El - 1/2 El.eps~.El
/// over the brick. The residual is dH/dq and the tangent d2H/dq2.
template <typename Scalar = double>
ElementResult<Scalar> element_integrate(const ElementState<Scalar>& state, const Mat9& d) {
  ElementResult<Scalar> out;
  const Mat9 h = enthalpy_hessian(d);
  const ElemVec<Scalar> q = state.dofs();
  for (const Vec3& xi : gauss_points_2x2x2()) {
    const SpatialGradients g = spatial_gradients(state.coords, xi);
    const Eigen::Matrix<double, 9, 32> b = generalized_strain_operator(g.dN);
    const Eigen::Matrix<double, 32, 9> bth = b.transpose() * h * g.det_j;
    out.stiffness += (bth * b).template cast<Scalar>();
  }
  out.residual = out.stiffness * q;
  out.energy = Scalar(0.5) * q.dot(out.residual);
  return out;
}

/// Quadrature sums needed for volume averaging over one brick.
struct ElementAverages {
  double volume = 0.0;
  Vec9 strain_integral = Vec9::Zero();  ///< int g dV
  Vec9 stress_integral = Vec9::Zero();  ///< int [S; D] dV
  double work = 0.0;                    ///< int (S.eps + D.El) dV
  Vec9 centroid_stress = Vec9::Zero();  ///< [S; D] at xi = 0
};
ElementAverages element_averages(const ElementState<double>& state, const Mat9& d);

}  // namespace piezohom
