#pragma once

#include "piezohom/constraints.hpp"
#include "piezohom/contact.hpp"
#include "piezohom/material.hpp"
#include "piezohom/mesh.hpp"

#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace piezohom {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct SolverOptions {
  double tol = 1e-10;           ///< relative residual per field
  double increment_tol = 1e-12; ///< displacement increment, relative to L
  int max_iter = 30;
  int max_line_search = 10;
  int max_flips = 3;  ///< a pair that changes status this often is frozen
  int threads = 1;
  bool deterministic = true;

  void validate() const;
};

/// Everything that defines one boundary value problem on the RVE.
struct Problem {
  const RveMesh* mesh = nullptr;
  Mat9 d = Mat9::Zero();  ///< microscale constitutive matrix
  ConstraintSet constraints;
  std::vector<ContactInterface> contacts;
  PenaltyParams penalty;
  Vec9 macro = Vec9::Zero();  ///< affine field used for the initial state and fluctuations
};

/// Builds the problem for the mesh with contact interfaces from the mesh
/// (pass contact=false to leave them out).
Problem make_problem(const RveMesh& mesh, const Mat9& d, ConstraintSet constraints, const PenaltyParams& penalty,
                     bool contact, const Vec9& macro);

/// Bulk (element) part of the coupled system. The kinematically linear
/// bulk operator is constant, so it is assembled once.
struct BulkOperator {
  SparseMatrix k;
  Index num_dofs = 0;
};
BulkOperator assemble_bulk(const RveMesh& mesh, const DofMap& dofs, const Mat9& d, int threads = 1,
                           bool deterministic = true);

/// Sparse constraint matrix C and right-hand side b (C q = b).
void constraint_rows(const ConstraintSet& set, Index num_dofs, SparseMatrix& c, Eigen::VectorXd& b);

/// Nodal fields from the global dof vector.
NodeCoords nodal_displacements(const DofMap& dofs, const Eigen::VectorXd& q);
Eigen::VectorXd nodal_potentials(const DofMap& dofs, const Eigen::VectorXd& q);

/// Global dof vector of the affine field g (relative to the cell minimum).
Eigen::VectorXd affine_dofs(const RveMesh& mesh, const DofMap& dofs, const Vec9& g);

struct PairState {
  ContactPair pair;
  bool active = false;
  bool frozen = false;
  int flips = 0;
};

/// Contact part at a state: energy, residual and triplets of the tangent.
struct ContactAssembly {
  double energy_mech = 0.0;
  double energy_el = 0.0;
  Eigen::VectorXd residual;
  std::vector<Eigen::Triplet<double>> triplets;
  Index active = 0;
};
ContactAssembly assemble_contact(const Problem& p, const std::vector<std::vector<PairState>>& pairs,
                                 const Eigen::VectorXd& q);

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_u;    ///< per iteration, relative
  std::vector<double> residual_phi;  ///< per iteration, relative
  std::vector<Index> active_counts;
  bool converged = false;
  double wall_time = 0.0;
  std::string message;
};

struct Solution {
  Eigen::VectorXd q;
  Eigen::VectorXd lambda;
  std::vector<std::vector<PairState>> pairs;
  double energy_bulk = 0.0;
  double energy_contact_mech = 0.0;
  double energy_contact_el = 0.0;
  Eigen::VectorXd internal_force;  ///< bulk + contact residual at q
  Eigen::VectorXd contact_force;   ///< contact residual at q
  SolveReport report;
};

/// Active-set Newton on the saddle-point system [K C^T; C 0].
Solution newton_solve(const Problem& p, const SolverOptions& opt);

/// Same, reusing an already assembled bulk operator.
Solution newton_solve(const Problem& p, const BulkOperator& bulk, const SolverOptions& opt);

}  // namespace piezohom
