#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace piezohom {

using Index = Eigen::Index;

template <typename Scalar> using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Mat3T = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Vec9T = Eigen::Matrix<Scalar, 9, 1>;
template <typename Scalar> using Mat9T = Eigen::Matrix<Scalar, 9, 9>;
template <typename Scalar> using Vec14T = Eigen::Matrix<Scalar, 14, 1>;
template <typename Scalar> using Mat14T = Eigen::Matrix<Scalar, 14, 14>;

using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;
using Vec9 = Vec9T<double>;
using Mat9 = Mat9T<double>;
using Vec14 = Vec14T<double>;
using Mat14 = Mat14T<double>;

/// Slots of the 9-component generalized strain / stress vectors:
/// (E11, E22, E33, 2E12, 2E13, 2E23, El1, El2, El3) and
/// (S11, S22, S33, S12, S13, S23, D1, D2, D3).
enum Slot : int {
  kE11 = 0,
  kE22 = 1,
  kE33 = 2,
  kE12 = 3,
  kE13 = 4,
  kE23 = 5,
  kEl1 = 6,
  kEl2 = 7,
  kEl3 = 8,
};

/// Degrees of freedom carried by every node: three displacements and the
/// electric potential.
inline constexpr int kDofsPerNode = 4;

/// Base class of all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace piezohom
