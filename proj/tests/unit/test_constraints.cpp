#include "doctest.h"

#include "piezohom/constraints.hpp"
#include "piezohom/solver.hpp"

using namespace piezohom;

TEST_CASE("bond condensation") {
  const DofMap one = condense_bonds(5, {{1, 3}});
  CHECK(one.num_dofs() == 4 * 5 - 4);
  CHECK(one.dof(3, 2) == one.dof(1, 2));

  const DofMap chain = condense_bonds(4, {{0, 1}, {1, 2}});
  CHECK(chain.representative[1] == 0);
  CHECK(chain.representative[2] == 0);
  CHECK(chain.num_dof_nodes == 2);

  const DofMap cycle = condense_bonds(3, {{0, 1}, {1, 2}, {2, 0}});
  CHECK(cycle.num_dof_nodes == 1);
  CHECK_THROWS_AS(condense_bonds(2, {{0, 5}}), Error);
}

TEST_CASE("periodic offsets follow the macro strain") {
  const RveMesh m = generate_box(Eigen::Vector3i(2, 2, 2), Vec3(2, 3, 4));
  const DofMap dofs = condense_bonds(m.num_nodes(), {});
  const ConstraintSet zero = build_periodic_constraints(m, dofs);
  for (const PeriodicLink& l : zero.links) CHECK(l.offset == 0.0);

  Vec9 g = Vec9::Zero();
  const double delta = 1e-3;
  g(kE11) = delta;
  const ConstraintSet set = build_periodic_constraints(m, dofs, g);
  for (const PeriodicLink& l : set.links) {
    const Index np = l.plus / 4, nm = l.minus / 4;
    const int comp = int(l.plus % 4);
    const bool shifted_x = std::abs(m.nodes(np, 0) - m.nodes(nm, 0) - 2.0) < 1e-12;
    if (comp == 0 && shifted_x) {
      CHECK(l.offset == doctest::Approx(delta * 2.0));
    } else {
      CHECK(l.offset == 0.0);
    }
  }
  // one link per dof of every non-canonical boundary node: 27 - 8 canonical nodes
  CHECK(set.links.size() == 4 * (27 - 8));
}

TEST_CASE("affine fields satisfy the periodic constraints exactly") {
  MeshParams p;
  const RveMesh m = generate_fiber_rve(p);
  const DofMap dofs = condense_bonds(m.num_nodes(), m.bond_pairs);
  Vec9 g;
  g << 0.01, -0.02, 0.005, 0.03, -0.01, 0.002, 0.4, -0.3, 0.2;
  const ConstraintSet set = build_periodic_constraints(m, dofs, g);
  SparseMatrix c;
  Eigen::VectorXd b;
  constraint_rows(set, dofs.num_dofs(), c, b);
  const Eigen::VectorXd q = affine_dofs(m, dofs, g);
  CHECK((c * q - b).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("load case table rows") {
  const LoadCase c13 = build_load_case(Coefficient::C13, 0.01);
  CHECK(c13.driver == kE33);
  CHECK(c13.measured == kE11);
  CHECK(c13.faces[5].u[2]);   // C+ driven by u3
  CHECK(!c13.faces[5].phi);
  CHECK(c13.faces[4].phi);    // grounded on C-
  CHECK(c13.faces[0].u[0]);   // A normal fixed
  CHECK(c13.faces[2].u[1]);   // B normal fixed

  const LoadCase e33 = build_load_case(Coefficient::e33, 0.5);
  CHECK(e33.driver == kEl3);
  CHECK(e33.sign == -1.0);
  CHECK(e33.faces[5].phi);
  CHECK(e33.faces[4].phi);
  CHECK(e33.macro(2.0)(kEl3) == doctest::Approx(1.0));

  const LoadCase c44 = build_load_case(Coefficient::C44, 0.01);
  CHECK(c44.faces[0].u[2]);
  CHECK(c44.faces[0].phi);
  CHECK(c44.faces[4].u[0]);

  CHECK(parse_coefficient("eps11bar") == Coefficient::eps11);
  CHECK(parse_coefficient("C66") == Coefficient::C66);
  CHECK(!parse_coefficient("C99bar").has_value());
  for (Coefficient c : kAllCoefficients) CHECK(parse_coefficient(coefficient_name(c)) == c);
}

TEST_CASE("face prescriptions equal the affine field") {
  const RveMesh m = generate_box(Eigen::Vector3i(2, 2, 2), Vec3(1, 1, 1));
  const DofMap dofs = condense_bonds(m.num_nodes(), {});
  const LoadCase lc = build_load_case(Coefficient::C44, 0.02);
  const ConstraintSet set = build_face_constraints(m, dofs, lc);
  const Eigen::VectorXd q = affine_dofs(m, dofs, lc.macro());
  for (const DirichletEntry& d : set.dirichlet) CHECK(q(d.dof) == doctest::Approx(d.value).epsilon(1e-14));

  const ConstraintSet zero = build_face_constraints(m, dofs, build_load_case(Coefficient::C11, 0.0));
  for (const DirichletEntry& d : zero.dirichlet) CHECK(d.value == 0.0);
}

TEST_CASE("conflicting prescriptions are rejected") {
  ConstraintSet set;
  set.prescribe(3, 1.0);
  set.prescribe(3, 1.0);
  CHECK(set.dirichlet.size() == 1);
  CHECK_THROWS_AS(set.prescribe(3, 2.0), Error);
}

TEST_CASE("bonded patch under rigid translation stores no energy") {
  MeshParams p;
  p.layout = FiberLayout::Centered;
  p.grid = {2, 2};
  p.circumferential = 8;
  p.axial = 1;
  const RveMesh m = generate_fiber_rve(p);
  const DofMap dofs = condense_bonds(m.num_nodes(), m.bond_pairs);
  const BulkOperator bulk = assemble_bulk(m, dofs, micro_constitutive_matrix(PiezoMaterial::pvdf()));
  Eigen::VectorXd q = Eigen::VectorXd::Zero(dofs.num_dofs());
  for (Index i = 0; i < dofs.num_dof_nodes; ++i) q.segment<4>(4 * i) << 0.3, -0.2, 0.1, 5.0;
  CHECK(std::abs(0.5 * q.dot(bulk.k * q)) < 1e-12 * bulk.k.norm());
}
