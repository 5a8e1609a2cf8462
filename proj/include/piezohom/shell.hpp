#pragma once

#include "piezohom/types.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace piezohom {

/// Shell strain slots:
/// (e11, e22, 2e12, k11, k22, 2k12, g1, g2, El1, El2, e33^0, e33^1, El3^0, El3^1).
enum ShellSlot : int {
  kS11 = 0, kS22, kS12, kK11, kK22, kK12, kG1, kG2, kSEl1, kSEl2, kS33_0, kS33_1, kSEl3_0, kSEl3_1,
};

const std::array<std::string, 14>& shell_strain_names();
const std::array<std::string, 14>& shell_resultant_names();

/// Gauss-Legendre points and weights on [-1/2, 1/2] (weights sum to 1).
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};
GaussRule gauss_legendre_half(int n);

/// 9 x 14 map from shell strains to the generalized strain at thickness
/// coordinate xi3 in [-1/2, 1/2]. The linear slots carry the distance from
/// the midsurface, h * xi3; with the default h = 1 they carry xi3 itself.
template <typename Scalar = double>
Eigen::Matrix<Scalar, 9, 14> build_A(Scalar xi3, Scalar h = Scalar(1)) {
  if (!(xi3 >= Scalar(-0.5) && xi3 <= Scalar(0.5))) throw Error("shell: thickness coordinate outside [-1/2, 1/2]");
  const Scalar z = h * xi3;
  Eigen::Matrix<Scalar, 9, 14> a = Eigen::Matrix<Scalar, 9, 14>::Zero();
  a(kE11, kS11) = 1, a(kE11, kK11) = z;
  a(kE22, kS22) = 1, a(kE22, kK22) = z;
  a(kE33, kS33_0) = 1, a(kE33, kS33_1) = z;
  a(kE12, kS12) = 1, a(kE12, kK12) = z;
  a(kE13, kG1) = 1;
  a(kE23, kG2) = 1;
  a(kEl1, kSEl1) = 1;
  a(kEl2, kSEl2) = 1;
  a(kEl3, kSEl3_0) = 1, a(kEl3, kSEl3_1) = z;
  return a;
}

template <typename Scalar = double>
struct ShellMatrix {
  Mat14T<Scalar> d = Mat14T<Scalar>::Zero();
  Scalar thickness = Scalar(0);
  Scalar mu_bar = Scalar(1);
  int n_gauss = 0;
};

/// h * int A^T D^M(xi3) A mu_bar dxi3 over [-1/2, 1/2] with an n-point Gauss rule. The
/// callback gives the solid matrix at each thickness point.
template <typename Scalar = double>
ShellMatrix<Scalar> integrate_shell_matrix(const std::function<Mat9T<Scalar>(Scalar)>& dm_at, Scalar h, int n_gauss = 2,
                                           Scalar mu_bar = Scalar(1)) {
  if (!(h > Scalar(0))) throw Error("shell: thickness must be positive");
  if (n_gauss < 2) throw Error("shell: at least two Gauss points are needed");
  if (!(mu_bar > Scalar(0))) throw Error("shell: shifter determinant must be positive");
  const GaussRule rule = gauss_legendre_half(n_gauss);
  ShellMatrix<Scalar> out;
  out.thickness = h;
  out.mu_bar = mu_bar;
  out.n_gauss = n_gauss;
  auto term = [&](std::size_t i) -> Mat14T<Scalar> {
    const Scalar xi(rule.points[i]);
    const Eigen::Matrix<Scalar, 9, 14> a = build_A<Scalar>(xi, h);
    return (a.transpose() * dm_at(xi) * a) * (h * Scalar(rule.weights[i]) * mu_bar);
  };
  // symmetric pairs first, so that odd moments cancel exactly
  const std::size_t n = rule.points.size();
  for (std::size_t i = 0; i < n / 2; ++i) out.d += term(i) + term(n - 1 - i);
  if (n % 2 == 1) out.d += term(n / 2);
  return out;
}

/// Same with D^M constant through the thickness.
template <typename Scalar = double>
ShellMatrix<Scalar> integrate_shell_matrix(const Mat9T<Scalar>& dm, Scalar h, int n_gauss = 2,
                                           Scalar mu_bar = Scalar(1)) {
  return integrate_shell_matrix<Scalar>([&](Scalar) { return dm; }, h, n_gauss, mu_bar);
}

/// L = D_shell * E_s.
template <typename Scalar = double>
Vec14T<Scalar> stress_resultants(const ShellMatrix<Scalar>& shell, const Vec14T<Scalar>& es) {
  return shell.d * es;
}

/// 14 x 14 matrix as CSV with a header row of strain names.
void write_shell_csv(std::ostream& os, const Mat14& d);

/// Human-readable report split into membrane, bending, shear, in-plane
/// electric and thickness blocks.
std::string shell_block_report(const ShellMatrix<double>& shell);

}  // namespace piezohom
