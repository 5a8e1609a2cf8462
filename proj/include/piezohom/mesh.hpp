#pragma once

#include "piezohom/types.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace piezohom {

/// Faces of the box-shaped cell. A is normal to axis 1, B to axis 2 (the
/// fiber axis), C to axis 3 (the poling / thickness axis).
enum class Face : int { AMinus = 0, APlus, BMinus, BPlus, CMinus, CPlus };

inline constexpr std::array<Face, 6> kAllFaces = {Face::AMinus, Face::APlus, Face::BMinus,
                                                  Face::BPlus,  Face::CMinus, Face::CPlus};

const char* face_name(Face f);
inline int face_axis(Face f) { return static_cast<int>(f) / 2; }
inline bool face_is_plus(Face f) { return static_cast<int>(f) % 2 == 1; }

/// Where fiber axes sit relative to the cell.
enum class FiberLayout {
  /// Fiber axes on the lattice points i*2R of the cell, fibers clipped by the
  /// cell box. A 1x1 grid gives the edge-2R cell made of four quarter fibers.
  Corner,
  /// Fiber axes at cell-interior points (i+1/2)*2R; every fiber is whole.
  Centered,
};

struct MeshParams {
  double fiber_radius = 1.0;
  FiberLayout layout = FiberLayout::Corner;
  /// Fiber count along axes 1 and 3.
  std::array<int, 2> grid{1, 1};
  /// Element counts: around the full circumference (multiple of 8), radially
  /// across the outer ring, and along the fiber.
  int circumferential = 16;
  int radial = 2;
  int axial = 2;
  /// Cell length along the fiber; non-positive means 2R.
  double axial_length = 0.0;
  /// Half-width of the square core as a fraction of R.
  double core_fraction = 0.5;
  /// Push non-tangency boundary nodes outwards so the polygonal section has
  /// area pi R^2. Tangency nodes always stay on the circle.
  bool area_preserving = true;
  /// Half-opening of the arcs searched for contact around each tangency line.
  double contact_half_angle_deg = 45.0;

  void validate() const;
};

/// Arc of lateral-surface nodes of one fiber: rows follow increasing angle,
/// columns follow the fiber axis.
struct FiberSurface {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();  ///< axis position in the (x1, x3) plane
  std::vector<double> theta;                          ///< angle of every row, radians
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> nodes;
  bool closed = false;  ///< true when the arc covers the whole circle
};

/// Master-slave contact interface between two fibers.
struct ContactSurface {
  int master_fiber = -1;
  int slave_fiber = -1;
  /// Structured master node grid, rows circumferential, columns axial.
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> master_grid;
  std::vector<Index> slave_nodes;
  /// Reference lateral-surface area lumped to each slave node.
  std::vector<double> slave_areas;
};

struct PeriodicPair {
  Index minus = -1;
  Index plus = -1;
  int axis = 0;
};

struct RveMesh {
  Eigen::Matrix<double, Eigen::Dynamic, 3> nodes;
  std::vector<std::array<Index, 8>> elements;
  std::vector<int> element_fiber;
  std::vector<int> node_fiber;
  std::map<std::string, std::vector<Index>> face_sets;
  std::vector<std::pair<Index, Index>> bond_pairs;
  std::vector<ContactSurface> contact_surfaces;
  std::vector<FiberSurface> fibers;

  Vec3 cell_min = Vec3::Zero();
  Vec3 cell_size = Vec3::Zero();
  double fiber_radius = 0.0;

  Index num_nodes() const { return nodes.rows(); }
  Index num_elements() const { return static_cast<Index>(elements.size()); }
  Vec3 node(Index i) const { return nodes.row(i).transpose(); }
  /// Largest cell edge; the reference length for tolerances.
  double rve_edge() const { return cell_size.maxCoeff(); }
  double cell_volume() const { return cell_size.prod(); }
  /// Sum of element volumes (the solid phase).
  double solid_volume() const;
  const std::vector<Index>& face(Face f) const;
};

/// Structured mesh of square-packed cylindrical fibers running along axis 2.
RveMesh generate_fiber_rve(const MeshParams& params);

/// Homogeneous box [0,size] meshed with n(0) x n(1) x n(2) bricks.
RveMesh generate_box(const Eigen::Vector3i& n, const Vec3& size);

/// Node pairs on opposite faces related by the cell translation. Throws on a
/// face node without a partner.
std::vector<PeriodicPair> identify_periodic_pairs(const RveMesh& mesh);

/// Contact interfaces between tangent fibers (empty for a single fiber).
std::vector<ContactSurface> identify_contact_interfaces(const RveMesh& mesh,
                                                        double half_angle_deg = 45.0);

/// Geometric checks of every documented mesh invariant; throws on violation.
void check_mesh(const RveMesh& mesh);

/// Plain-text mesh dump: node table, element table and named sets.
void write_mesh_text(std::ostream& os, const RveMesh& mesh);

}  // namespace piezohom
