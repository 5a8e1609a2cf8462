#pragma once

#include "piezohom/constraints.hpp"
#include "piezohom/contact.hpp"
#include "piezohom/material.hpp"
#include "piezohom/mesh.hpp"
#include "piezohom/solver.hpp"

namespace piezohom::testing {

/// Two stacked bricks of width w and height h each, 2 x 2 elements in plane
/// and one through the height, with separate (initially coincident) nodes
/// on the interface z = h.
struct TwoBricks {
  RveMesh mesh;
  Index lower_nodes = 0;
  ContactInterface iface;
};

inline TwoBricks two_bricks(double w, double h) {
  const RveMesh lower = generate_box(Eigen::Vector3i(2, 2, 1), Vec3(w, w, h));
  TwoBricks tb;
  tb.lower_nodes = lower.num_nodes();
  RveMesh& m = tb.mesh;
  m.nodes.resize(2 * lower.num_nodes(), 3);
  m.nodes.topRows(lower.num_nodes()) = lower.nodes;
  m.nodes.bottomRows(lower.num_nodes()) = lower.nodes;
  m.nodes.bottomRows(lower.num_nodes()).col(2).array() += h;
  m.elements = lower.elements;
  for (auto conn : lower.elements) {
    for (Index& n : conn) n += lower.num_nodes();
    m.elements.push_back(conn);
  }
  m.element_fiber.assign(lower.elements.size(), 0);
  m.element_fiber.resize(m.elements.size(), 1);
  m.node_fiber.assign(static_cast<std::size_t>(lower.num_nodes()), 0);
  m.node_fiber.resize(static_cast<std::size_t>(m.num_nodes()), 1);
  m.cell_size = Vec3(w, w, 2 * h);
  m.fiber_radius = 0.5 * w;

  // master: top of the lower brick; slaves: bottom of the upper brick
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> grid(3, 3);
  std::vector<Index> slaves;
  std::vector<double> areas;
  const double cell = 0.25 * w * w;
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) {
      const Index id = i + 3 * (j + 3 * 1);  // top layer of the lower box
      grid(i, j) = id;
      slaves.push_back(id + lower.num_nodes() - 9);  // bottom layer of the upper box
      const int corners = (i == 1 ? 2 : 1) * (j == 1 ? 2 : 1);
      areas.push_back(0.25 * cell * corners);
    }
  tb.iface = make_contact_interface(grid, slaves, areas, m.nodes, [](const Vec3&) { return Vec3(0, 0, 1); }, 2 * h);
  return tb;
}

/// Lateral rollers on both bricks, bottom fixed, top pushed down by delta;
/// potential 0 at the bottom and v at the top. With rigid_master the master
/// surface is held as well, so only the upper brick deforms.
inline ConstraintSet squeeze_constraints(const TwoBricks& tb, double delta, double v, bool rigid_master = false) {
  ConstraintSet set;
  set.dofs = condense_bonds(tb.mesh.num_nodes(), {});
  const double tol = 1e-12;
  const Vec3 size = tb.mesh.cell_size;
  for (Index n = 0; n < tb.mesh.num_nodes(); ++n) {
    const Vec3 x = tb.mesh.node(n);
    if (std::abs(x(0)) < tol || std::abs(x(0) - size(0)) < tol) set.prescribe(set.dofs.dof(n, 0), 0.0);
    if (std::abs(x(1)) < tol || std::abs(x(1) - size(1)) < tol) set.prescribe(set.dofs.dof(n, 1), 0.0);
    if (std::abs(x(2)) < tol) {
      set.prescribe(set.dofs.dof(n, 2), 0.0);
      set.prescribe(set.dofs.dof(n, 3), 0.0);
    }
    if (std::abs(x(2) - size(2)) < tol) {
      set.prescribe(set.dofs.dof(n, 2), -delta);
      set.prescribe(set.dofs.dof(n, 3), v);
    }
  }
  if (rigid_master)
    for (Index i = 0; i < tb.iface.master_grid.rows(); ++i)
      for (Index j = 0; j < tb.iface.master_grid.cols(); ++j)
        for (int k = 0; k < kDofsPerNode; ++k) set.prescribe(set.dofs.dof(tb.iface.master_grid(i, j), k), 0.0);
  return set;
}

}  // namespace piezohom::testing
