#include "piezohom/constraints.hpp"

#include "piezohom/detail/point_locator.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace piezohom {

DofMap condense_bonds(Index num_nodes, const std::vector<std::pair<Index, Index>>& bonds) {
  std::vector<Index> parent(static_cast<std::size_t>(num_nodes));
  std::iota(parent.begin(), parent.end(), Index(0));
  auto find = [&](Index i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  for (const auto& [a, b] : bonds) {
    if (a < 0 || b < 0 || a >= num_nodes || b >= num_nodes) throw Error("constraints: bond node index out of range");
    const Index ra = find(a), rb = find(b);
    if (ra == rb) continue;
    // the smaller index represents the group
    parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
  }
  DofMap map;
  map.representative.resize(static_cast<std::size_t>(num_nodes));
  map.slot.assign(static_cast<std::size_t>(num_nodes), -1);
  for (Index i = 0; i < num_nodes; ++i) {
    const Index r = find(i);
    map.representative[static_cast<std::size_t>(i)] = r;
    if (r == i) map.slot[static_cast<std::size_t>(i)] = map.num_dof_nodes++;
  }
  for (Index i = 0; i < num_nodes; ++i)
    map.slot[static_cast<std::size_t>(i)] = map.slot[static_cast<std::size_t>(map.representative[static_cast<std::size_t>(i)])];
  return map;
}

void ConstraintSet::prescribe(Index dof, double value) {
  for (const DirichletEntry& d : dirichlet) {
    if (d.dof != dof) continue;
    if (std::abs(d.value - value) > 1e-12 * (1.0 + std::abs(value))) {
      std::ostringstream msg;
      msg << "constraints: dof " << dof << " prescribed twice with conflicting values " << d.value << " and " << value;
      throw Error(msg.str());
    }
    return;
  }
  dirichlet.push_back({dof, value});
}

Eigen::Vector4d affine_value(const Vec9& g, const Vec3& dx) {
  Mat3 eps;
  eps << g(kE11), 0.5 * g(kE12), 0.5 * g(kE13),  //
      0.5 * g(kE12), g(kE22), 0.5 * g(kE23),     //
      0.5 * g(kE13), 0.5 * g(kE23), g(kE33);
  Eigen::Vector4d v;
  v.head<3>() = eps * dx;
  v(3) = -g.tail<3>().dot(dx);
  return v;
}

ConstraintSet build_periodic_constraints(const RveMesh& mesh, const DofMap& dofs, const Vec9& macro) {
  const double tol = 1e-10 * mesh.rve_edge();
  ConstraintSet set;
  set.dofs = dofs;

  detail::PointLocator locator(tol);
  for (Index i = 0; i < mesh.num_nodes(); ++i) locator.insert(i, mesh.node(i));

  std::vector<char> on_plus(static_cast<std::size_t>(mesh.num_nodes()), 0);
  for (Face f : {Face::APlus, Face::BPlus, Face::CPlus})
    for (Index n : mesh.face(f)) on_plus[static_cast<std::size_t>(n)] = 1;

  std::vector<char> linked(static_cast<std::size_t>(dofs.num_dof_nodes), 0);
  for (Index n = 0; n < mesh.num_nodes(); ++n) {
    if (!on_plus[static_cast<std::size_t>(n)]) continue;
    Vec3 x = mesh.node(n);
    Vec3 shift = Vec3::Zero();
    for (int ax = 0; ax < 3; ++ax) {
      if (std::abs(x(ax) - mesh.cell_min(ax) - mesh.cell_size(ax)) <= tol) {
        x(ax) -= mesh.cell_size(ax);
        shift(ax) = mesh.cell_size(ax);
      }
    }
    const Index canon = locator.find(x);
    if (canon < 0) {
      std::ostringstream msg;
      msg << "constraints: boundary node " << n << " has no periodic image at the cell minimum faces";
      throw Error(msg.str());
    }
    const Index s_plus = dofs.slot[static_cast<std::size_t>(n)];
    const Index s_minus = dofs.slot[static_cast<std::size_t>(canon)];
    if (s_plus == s_minus || linked[static_cast<std::size_t>(s_plus)]) continue;
    linked[static_cast<std::size_t>(s_plus)] = 1;
    const Eigen::Vector4d jump = affine_value(macro, shift);
    for (int k = 0; k < kDofsPerNode; ++k)
      set.links.push_back({dofs.dof(canon, k), dofs.dof(n, k), jump(k)});
  }
  for (const PeriodicLink& l : set.links)
    if (linked[static_cast<std::size_t>(l.minus / kDofsPerNode)])
      throw Error("constraints: periodic representative is itself linked (chained periodic constraint)");

  // pin the unlinked node closest to the cell minimum corner
  Index pin = -1;
  double best = 0.0;
  for (Index n = 0; n < mesh.num_nodes(); ++n) {
    if (linked[static_cast<std::size_t>(dofs.slot[static_cast<std::size_t>(n)])]) continue;
    const double d = (mesh.node(n) - mesh.cell_min).squaredNorm();
    if (pin < 0 || d < best - tol * tol) {
      pin = n;
      best = d;
    }
  }
  if (pin < 0) throw Error("constraints: no node available to pin");
  const Eigen::Vector4d v = affine_value(macro, mesh.node(pin) - mesh.cell_min);
  for (int k = 0; k < kDofsPerNode; ++k) set.prescribe(dofs.dof(pin, k), v(k));
  return set;
}

std::string coefficient_name(Coefficient c) {
  switch (c) {
    case Coefficient::C11: return "C11bar";
    case Coefficient::C12: return "C12bar";
    case Coefficient::C13: return "C13bar";
    case Coefficient::C33: return "C33bar";
    case Coefficient::C44: return "C44bar";
    case Coefficient::C66: return "C66bar";
    case Coefficient::e13: return "e13bar";
    case Coefficient::e33: return "e33bar";
    case Coefficient::e15: return "e15bar";
    case Coefficient::eps11: return "eps11bar";
    case Coefficient::eps33: return "eps33bar";
  }
  return "?";
}

std::optional<Coefficient> parse_coefficient(const std::string& name) {
  for (Coefficient c : kAllCoefficients) {
    const std::string full = coefficient_name(c);
    if (name == full || name == full.substr(0, full.size() - 3)) return c;
  }
  return std::nullopt;
}

Vec9 LoadCase::macro(double field_scale) const {
  Vec9 g = Vec9::Zero();
  g(driver) = driver >= kEl1 ? amplitude * field_scale : amplitude;
  return g;
}

LoadCase build_load_case(Coefficient c, double amplitude) {
  LoadCase lc;
  lc.coefficient = c;
  lc.amplitude = amplitude;

  // Face order A-, A+, B-, B+, C-, C+. "0" on a face prescribes the normal
  // component; a named (u_i) prescribes that component instead.
  auto face = [](int u_component, bool phi) {
    FacePrescription f;
    f.u[static_cast<std::size_t>(u_component)] = true;
    f.phi = phi;
    return f;
  };
  const FacePrescription a_free = face(0, false), b_free = face(1, false), c_free = face(2, false);
  const FacePrescription c_grounded = face(2, true);

  switch (c) {
    case Coefficient::C11:
    case Coefficient::C12:
      lc.driver = kE11;
      lc.measured = c == Coefficient::C11 ? kE11 : kE22;
      lc.faces = {a_free, a_free, b_free, b_free, c_grounded, c_grounded};
      break;
    case Coefficient::C13:
    case Coefficient::C33:
      lc.driver = kE33;
      lc.measured = c == Coefficient::C13 ? kE11 : kE33;
      lc.faces = {a_free, a_free, b_free, b_free, c_grounded, c_free};
      break;
    case Coefficient::C44:
    case Coefficient::e15:
      lc.driver = kE13;
      lc.measured = c == Coefficient::C44 ? kE13 : kEl1;
      lc.faces = {face(2, true), face(2, true), b_free, b_free, face(0, false), face(0, false)};
      break;
    case Coefficient::C66:
      lc.driver = kE12;
      lc.measured = kE12;
      lc.faces = {face(1, false), face(1, false), face(0, false), face(0, false), c_grounded, c_grounded};
      break;
    case Coefficient::e13:
    case Coefficient::e33:
      lc.driver = kEl3;
      lc.measured = c == Coefficient::e13 ? kE11 : kE33;
      lc.sign = -1.0;
      lc.faces = {a_free, a_free, b_free, b_free, c_grounded, c_grounded};
      break;
    case Coefficient::eps11:
      lc.driver = kEl1;
      lc.measured = kEl1;
      lc.faces = {face(0, true), face(0, true), b_free, b_free, c_free, c_free};
      break;
    case Coefficient::eps33:
      lc.driver = kEl3;
      lc.measured = kEl3;
      lc.faces = {a_free, a_free, b_free, b_free, c_grounded, c_grounded};
      break;
  }
  return lc;
}

ConstraintSet build_face_constraints(const RveMesh& mesh, const DofMap& dofs, const LoadCase& lc,
                                     double field_scale) {
  ConstraintSet set;
  set.dofs = dofs;
  const Vec9 g = lc.macro(field_scale);
  for (Face f : kAllFaces) {
    const FacePrescription& p = lc.faces[static_cast<std::size_t>(f)];
    for (Index n : mesh.face(f)) {
      const Eigen::Vector4d v = affine_value(g, mesh.node(n) - mesh.cell_min);
      for (int k = 0; k < 3; ++k)
        if (p.u[static_cast<std::size_t>(k)]) set.prescribe(dofs.dof(n, k), v(k));
      if (p.phi) set.prescribe(dofs.dof(n, 3), v(3));
    }
  }
  return set;
}

}  // namespace piezohom
