#include "piezohom/io.hpp"

#include "piezohom/element.hpp"

#include <iomanip>
#include <ostream>

namespace piezohom {

namespace {

void write_geometry(std::ostream& os, const RveMesh& mesh, const std::string& title) {
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << std::setprecision(12);
  os << "POINTS " << mesh.num_nodes() << " double\n";
  for (Index i = 0; i < mesh.num_nodes(); ++i)
    os << mesh.nodes(i, 0) << ' ' << mesh.nodes(i, 1) << ' ' << mesh.nodes(i, 2) << '\n';
  os << "CELLS " << mesh.num_elements() << ' ' << 9 * mesh.num_elements() << '\n';
  for (const auto& conn : mesh.elements) {
    os << 8;
    for (Index n : conn) os << ' ' << n;
    os << '\n';
  }
  os << "CELL_TYPES " << mesh.num_elements() << '\n';
  for (Index e = 0; e < mesh.num_elements(); ++e) os << "12\n";
  os << "CELL_DATA " << mesh.num_elements() << "\nSCALARS fiber int 1\nLOOKUP_TABLE default\n";
  for (int f : mesh.element_fiber) os << f << '\n';
}

}  // namespace

void write_vtk(std::ostream& os, const RveMesh& mesh, const std::string& title) { write_geometry(os, mesh, title); }

void write_vtk(std::ostream& os, const RveMesh& mesh, const DofMap& dofs, const Mat9& d, const Eigen::VectorXd& q,
               const std::string& title) {
  write_geometry(os, mesh, title);
  static const char* names[9] = {"S11", "S22", "S33", "S12", "S13", "S23", "D1", "D2", "D3"};
  std::vector<Vec9> stress;
  stress.reserve(mesh.elements.size());
  for (const auto& conn : mesh.elements) {
    ElementState<double> st;
    for (int a = 0; a < 8; ++a) {
      const Index n = conn[static_cast<std::size_t>(a)];
      st.coords.row(a) = mesh.nodes.row(n);
      st.u.row(a) = q.segment<3>(dofs.dof(n, 0)).transpose();
      st.phi(a) = q(dofs.dof(n, 3));
    }
    stress.push_back(d * element_strain(st, Vec3::Zero()));
  }
  for (int k = 0; k < 9; ++k) {
    os << "SCALARS " << names[k] << " double 1\nLOOKUP_TABLE default\n";
    for (const Vec9& s : stress) os << s(k) << '\n';
  }
  os << "POINT_DATA " << mesh.num_nodes() << "\nVECTORS displacement double\n";
  for (Index n = 0; n < mesh.num_nodes(); ++n)
    os << q(dofs.dof(n, 0)) << ' ' << q(dofs.dof(n, 1)) << ' ' << q(dofs.dof(n, 2)) << '\n';
  os << "SCALARS potential double 1\nLOOKUP_TABLE default\n";
  for (Index n = 0; n < mesh.num_nodes(); ++n) os << q(dofs.dof(n, 3)) << '\n';
}

void write_coefficient_header(std::ostream& os) { os << "amplitude,coefficient,value,hill_gap,iterations,converged\n"; }

void write_coefficient_rows(std::ostream& os, const EffectiveMatrix& m) {
  os << std::setprecision(17);
  for (const CaseResult& c : m.cases) {
    os << c.amplitude << ',' << coefficient_name(c.coefficient) << ',' << c.value << ',';
    if (c.hill.defined) {
      os << c.hill.gap;
    } else {
      os << "nan";
    }
    os << ',' << c.report.iterations << ',' << (c.valid ? 1 : 0) << '\n';
  }
}

void write_matrix_csv(std::ostream& os, const Mat9& d) {
  os << std::setprecision(17);
  for (int i = 0; i < 9; ++i) {
    for (int k = 0; k < 9; ++k) os << (k ? "," : "") << d(i, k);
    os << '\n';
  }
}

}  // namespace piezohom
