#pragma once

#include "piezohom/constraints.hpp"
#include "piezohom/homogenize.hpp"
#include "piezohom/mesh.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace piezohom {

/// Legacy ASCII VTK unstructured grid of the mesh. With a solution, point
/// data holds displacement and potential, cell data the generalized stress
/// at the element centre.
void write_vtk(std::ostream& os, const RveMesh& mesh, const std::string& title);
void write_vtk(std::ostream& os, const RveMesh& mesh, const DofMap& dofs, const Mat9& d, const Eigen::VectorXd& q,
               const std::string& title);

/// One row per (amplitude, coefficient): amplitude,coefficient,value,hill_gap,iterations,converged.
void write_coefficient_header(std::ostream& os);
void write_coefficient_rows(std::ostream& os, const EffectiveMatrix& m);

/// 9 x 9 matrix as CSV.
void write_matrix_csv(std::ostream& os, const Mat9& d);

}  // namespace piezohom
