#include "piezohom/shell.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace piezohom {

const std::array<std::string, 14>& shell_strain_names() {
  static const std::array<std::string, 14> names = {"eps11", "eps22", "2eps12", "kap11", "kap22",  "2kap12", "gam1",
                                                    "gam2",  "El1",   "El2",    "eps33_0", "eps33_1", "El3_0", "El3_1"};
  return names;
}

const std::array<std::string, 14>& shell_resultant_names() {
  static const std::array<std::string, 14> names = {"n11", "n22", "n12", "m11",   "m22",   "m12",  "p1",
                                                    "p2",  "-d1", "-d2", "n33_0", "n33_1", "-d3_0", "-d3_1"};
  return names;
}

GaussRule gauss_legendre_half(int n) {
  if (n < 1) throw Error("shell: Gauss rule needs at least one point");
  // Golub-Welsch on the Legendre Jacobi matrix
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  GaussRule r;
  for (int i = 0; i < n; ++i) {
    const double v = es.eigenvectors()(0, i);
    r.points.push_back(0.5 * es.eigenvalues()(i));
    r.weights.push_back(v * v);  // 2 v^2 on [-1, 1], halved
  }
  // enforce exact symmetry so odd moments cancel to zero
  for (int i = 0; i < n / 2; ++i) {
    const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(n - 1 - i);
    const double x = 0.5 * (r.points[b] - r.points[a]);
    const double w = 0.5 * (r.weights[a] + r.weights[b]);
    r.points[a] = -x, r.points[b] = x;
    r.weights[a] = w, r.weights[b] = w;
  }
  if (n % 2 == 1) r.points[static_cast<std::size_t>(n / 2)] = 0.0;
  return r;
}

void write_shell_csv(std::ostream& os, const Mat14& d) {
  const auto& names = shell_strain_names();
  os << "row";
  for (const std::string& n : names) os << ',' << n;
  os << '\n';
  os << std::setprecision(17);
  for (int i = 0; i < 14; ++i) {
    os << shell_resultant_names()[static_cast<std::size_t>(i)];
    for (int k = 0; k < 14; ++k) os << ',' << d(i, k);
    os << '\n';
  }
}

std::string shell_block_report(const ShellMatrix<double>& shell) {
  struct Block {
    const char* name;
    std::vector<int> slots;
  };
  const std::vector<Block> blocks = {{"membrane", {kS11, kS22, kS12}},
                                     {"bending", {kK11, kK22, kK12}},
                                     {"transverse shear", {kG1, kG2}},
                                     {"in-plane electric", {kSEl1, kSEl2}},
                                     {"thickness", {kS33_0, kS33_1, kSEl3_0, kSEl3_1}}};
  const auto& names = shell_strain_names();
  std::ostringstream os;
  os << "shell matrix: h = " << shell.thickness << ", mu_bar = " << shell.mu_bar << ", " << shell.n_gauss
     << " Gauss points\n";
  os << std::scientific << std::setprecision(6);
  for (const Block& row : blocks)
    for (const Block& col : blocks) {
      double mx = 0.0;
      for (int i : row.slots)
        for (int k : col.slots) mx = std::max(mx, std::abs(shell.d(i, k)));
      if (mx == 0.0) continue;
      os << "\n[" << row.name << " x " << col.name << "]\n" << std::setw(10) << "";
      for (int k : col.slots) os << std::setw(15) << names[static_cast<std::size_t>(k)];
      os << '\n';
      for (int i : row.slots) {
        os << std::setw(10) << shell_resultant_names()[static_cast<std::size_t>(i)];
        for (int k : col.slots) os << std::setw(15) << shell.d(i, k);
        os << '\n';
      }
    }
  return os.str();
}

}  // namespace piezohom
