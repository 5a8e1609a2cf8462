#pragma once

#include "piezohom/mesh.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace piezohom {

/// Node -> global dof numbering after perfect-bond condensation. Bonded
/// nodes share all four dofs of their representative (the smallest index in
/// the bonded group).
struct DofMap {
  std::vector<Index> representative;  ///< per mesh node
  std::vector<Index> slot;            ///< per mesh node: dof-node index of its representative
  Index num_dof_nodes = 0;

  Index num_dofs() const { return kDofsPerNode * num_dof_nodes; }
  Index dof(Index node, int component) const {
    return kDofsPerNode * slot[static_cast<std::size_t>(node)] + component;
  }
};

DofMap condense_bonds(Index num_nodes, const std::vector<std::pair<Index, Index>>& bonds);

/// q[plus] - q[minus] = offset
struct PeriodicLink {
  Index minus = -1;
  Index plus = -1;
  double offset = 0.0;
};

struct DirichletEntry {
  Index dof = -1;
  double value = 0.0;
};

struct ConstraintSet {
  DofMap dofs;
  std::vector<PeriodicLink> links;
  std::vector<DirichletEntry> dirichlet;

  /// Adds a prescription; a second prescription of the same dof must agree.
  void prescribe(Index dof, double value);
  Index num_rows() const { return static_cast<Index>(links.size() + dirichlet.size()); }
};

/// Affine generalized displacement (u1, u2, u3, phi) of the macro field g at
/// relative position dx: u = eps dx (eps from engineering shear), phi = -El.dx.
Eigen::Vector4d affine_value(const Vec9& g, const Vec3& dx);

/// Periodic links for every boundary dof-node towards its canonical image
/// (the lattice image with minimal coordinates), offsets from the macro
/// generalized strain, plus one node pinned at its affine value.
ConstraintSet build_periodic_constraints(const RveMesh& mesh, const DofMap& dofs, const Vec9& macro = Vec9::Zero());

/// The eleven effective coefficients of the homogenized solid.
enum class Coefficient { C11, C12, C13, C33, C44, C66, e13, e33, e15, eps11, eps33 };
inline constexpr std::array<Coefficient, 11> kAllCoefficients = {
    Coefficient::C11, Coefficient::C12, Coefficient::C13, Coefficient::C33, Coefficient::C44,  Coefficient::C66,
    Coefficient::e13, Coefficient::e33, Coefficient::e15, Coefficient::eps11, Coefficient::eps33};

/// Short names used on the command line and in CSV output ("C11bar", "e33bar", "eps11bar", ...).
std::string coefficient_name(Coefficient c);
std::optional<Coefficient> parse_coefficient(const std::string& name);

/// Which components a face prescribes in one Table-1 row.
struct FacePrescription {
  std::array<bool, 3> u{};
  bool phi = false;
};

struct LoadCase {
  Coefficient coefficient = Coefficient::C11;
  double amplitude = 0.0;
  Slot driver = kE11;    ///< the single non-zero macro component
  Slot measured = kE11;  ///< averaged stress slot entering the formula
  double sign = 1.0;     ///< formula sign: coefficient = sign * measured / driver
  std::array<FacePrescription, 6> faces{};

  /// Macro generalized strain of the case; electric drivers are scaled by
  /// field_scale (V/um per unit amplitude).
  Vec9 macro(double field_scale = 1.0) const;
};

LoadCase build_load_case(Coefficient c, double amplitude);

/// Dirichlet program of Table 1: every prescribed component takes the value
/// of the affine macro field relative to the cell minimum corner.
ConstraintSet build_face_constraints(const RveMesh& mesh, const DofMap& dofs, const LoadCase& lc,
                                     double field_scale = 1.0);

}  // namespace piezohom
