#pragma once

#include "piezohom/constraints.hpp"
#include "piezohom/material.hpp"
#include "piezohom/mesh.hpp"
#include "piezohom/solver.hpp"

#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace piezohom {

/// Averages of one solved RVE state. Stress is integrated over the solid and
/// divided by the full cell volume, so voids dilute it. The strain used by
/// the coefficient formulas is the kinematic average (the imposed macro
/// field); the solid-only integral is kept for reporting.
struct AveragedState {
  Vec9 strain = Vec9::Zero();
  Vec9 strain_solid = Vec9::Zero();
  Vec9 stress = Vec9::Zero();
  double v_solid = 0.0;
  double v_void = 0.0;
  double v_rve = 0.0;
};

AveragedState volume_average(const RveMesh& mesh, const DofMap& dofs, const Mat9& d, const Eigen::VectorXd& q,
                             const Vec9& macro);

/// Hill bookkeeping for a periodic state. macro_work = V g.J.S (the J sign
/// matches the enthalpy), micro_work = q.K.q over the solid, and contact_work
/// = q~.R_c with q~ the fluctuation. Without contact the two works agree; with
/// contact their difference equals contact_work.
struct HillReport {
  double macro_work = 0.0;
  double micro_work = 0.0;
  double contact_work = 0.0;
  bool defined = false;  ///< false when the macro work vanishes
  double gap = 0.0;        ///< |macro - micro| / |macro|
  double bookkept = 0.0;   ///< contact_work / macro_work
};

HillReport hill_check(const Problem& p, const BulkOperator& bulk, const Solution& s, const AveragedState& avg);

/// Table-1 formula: sign * stress[measured] / strain[driver]. Throws on a
/// vanishing denominator.
double extract_coefficient(const LoadCase& lc, const AveragedState& avg);

enum class BoundaryMode { Periodic, Faces };

struct HomogenizeOptions {
  BoundaryMode mode = BoundaryMode::Periodic;
  bool contact = true;
  double field_scale = 1.0;  ///< V/um of electric driver per unit amplitude
  std::optional<PenaltyParams> penalty;  ///< default_penalty when empty
  SolverOptions solver;
  int jobs = 1;  ///< independent load cases solved concurrently
};

/// Shared, load-independent data of one RVE: dof map and bulk operator.
struct RveSystem {
  const RveMesh* mesh = nullptr;
  PiezoMaterial material;
  Mat9 d = Mat9::Zero();
  DofMap dofs;
  BulkOperator bulk;
};

RveSystem make_rve_system(const RveMesh& mesh, const PiezoMaterial& mat, int threads = 1, bool deterministic = true);

struct CaseResult {
  Coefficient coefficient = Coefficient::C11;
  double amplitude = 0.0;
  double value = 0.0;
  bool valid = false;  ///< converged and extractable
  AveragedState average;
  HillReport hill;
  SolveReport report;
  std::string error;
};

/// Solves one macro state. In periodic mode the constraints are periodic with
/// the given macro field; in faces mode the caller passes the load case.
Solution solve_macro_state(const RveSystem& sys, const Vec9& macro, const HomogenizeOptions& opt,
                           const LoadCase* faces_case = nullptr);

CaseResult run_load_case(const RveSystem& sys, Coefficient c, double amplitude, const HomogenizeOptions& opt);

/// Secant matrix of the homogenized solid with the sparsity of the
/// tetragonal square-packing matrix; every coefficient comes from its own
/// load case at the same amplitude.
struct EffectiveMatrix {
  Mat9 d = Mat9::Zero();
  double amplitude = 0.0;
  std::array<CaseResult, 11> cases{};
  bool partial = false;
};

/// Fills the slots of the tetragonal pattern from the eleven coefficients
/// (ordered as kAllCoefficients).
Mat9 assemble_secant_matrix(const std::array<double, 11>& coefficients);

/// Non-zero pattern of assemble_secant_matrix.
Eigen::Matrix<bool, 9, 9> secant_pattern();

EffectiveMatrix build_secant_matrix(const RveSystem& sys, double amplitude, const HomogenizeOptions& opt);

/// Full 9x9 secant matrix from nine periodic unit cases (column j is the
/// averaged generalized stress for macro = amplitude * e_j).
struct FullCharacterization {
  Mat9 d = Mat9::Zero();
  double amplitude = 0.0;
  std::array<SolveReport, 9> reports{};
  bool partial = false;
};
FullCharacterization characterize(const RveSystem& sys, double amplitude, const HomogenizeOptions& opt);

/// n log-spaced magnitudes in [lo, hi], followed by their negatives when
/// both_signs is set.
std::vector<double> amplitude_schedule(double lo, double hi, int n, bool both_signs = true);

std::vector<EffectiveMatrix> sweep_amplitudes(const RveSystem& sys, const std::vector<double>& schedule,
                                              const HomogenizeOptions& opt);

/// Runs f(i) for i in [0, n) on at most `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& f);

}  // namespace piezohom
