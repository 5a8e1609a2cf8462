#include "doctest.h"

#include "piezohom/contact.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace piezohom;

namespace {

using Grid = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>;

/// Nodes of a cylinder sector of radius r: rows along the angle, cols along y.
struct Sector {
  NodeCoords x;
  Grid grid;
};

Sector cylinder_sector(int rows, int cols, double dtheta, double dy, double radius = 1.0) {
  Sector s;
  s.x.resize(rows * cols, 3);
  s.grid.resize(rows, cols);
  const double t0 = -0.5 * dtheta * (rows - 1);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const Index id = i * cols + j;
      const double t = t0 + i * dtheta;
      s.x.row(id) << radius * std::cos(t), j * dy, radius * std::sin(t);
      s.grid(i, j) = id;
    }
  return s;
}

Vec3 radial_out(const Vec3& x) { return Vec3(x(0), 0.0, x(2)); }

/// Appends one slave node to a sector and returns the interface.
ContactInterface with_slave(Sector& s, const Vec3& slave, double area = 0.3) {
  const Index id = s.x.rows();
  s.x.conservativeResize(id + 1, 3);
  s.x.row(id) = slave.transpose();
  return make_contact_interface(s.grid, {id}, {area}, s.x, radial_out, 1.0);
}

Eigen::Matrix<double, 9, 3> planar_grid() {
  Eigen::Matrix<double, 9, 3> g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g.row(3 * i + j) << i - 1.0, j - 1.0, 0.0;
  return g;
}

}  // namespace

TEST_CASE("bezier patch of a planar grid is planar") {
  Eigen::Matrix<double, 9, 3> g = planar_grid();
  g(4, 0) += 0.1;  // irregular in-plane spacing stays planar
  const BezierPatch p = build_bezier9(g, Eigen::Matrix<double, 9, 1>::Zero());
  CHECK(p.beta == doctest::Approx(2.0 / 3.0));
  CHECK(p.control_points.col(2).cwiseAbs().maxCoeff() <= 1e-12);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 50; ++k) {
    const SurfacePoint s = surface_eval(p, Eigen::Vector2d(u(rng), u(rng)));
    CHECK(std::abs(s.x(2)) <= 1e-12);
    CHECK(std::abs(std::abs(s.normal(2)) - 1.0) <= 1e-12);
  }
  const SurfacePoint c = surface_eval(p, Eigen::Vector2d(0, 0));
  CHECK((c.x - p.control_points.row(0).transpose()).norm() <= 1e-15);
}

TEST_CASE("bernstein partition of unity and constant potentials") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 1000; ++k) {
    const double s = u(rng), t = u(rng);
    const Bernstein3 a = bernstein3(s), b = bernstein3(t);
    CHECK(std::abs((a.b * b.b.transpose()).sum() - 1.0) <= 1e-14);
    CHECK(std::abs(a.db.sum()) <= 1e-13);
  }
  const BezierPatch p = build_bezier9(planar_grid(), Eigen::Matrix<double, 9, 1>::Constant(3.5));
  for (int k = 0; k < 20; ++k) CHECK(surface_eval(p, Eigen::Vector2d(u(rng), u(rng))).phi == doctest::Approx(3.5));
}

TEST_CASE("repeated master nodes are rejected") {
  Eigen::Matrix<double, 9, 3> g = planar_grid();
  g.row(5) = g.row(4);
  CHECK_THROWS_AS(build_bezier9(g, Eigen::Matrix<double, 9, 1>::Zero()), Error);
}

TEST_CASE("patch on a cylinder stays inside the control net hull radii") {
  Sector s = cylinder_sector(3, 3, 0.3, 0.4);
  Eigen::Matrix<double, 9, 3> g;
  for (int k = 0; k < 9; ++k) g.row(k) = s.x.row(k);
  const BezierPatch p = build_bezier9(g, Eigen::Matrix<double, 9, 1>::Zero());
  Eigen::VectorXd radii(16);
  for (int k = 0; k < 16; ++k) radii(k) = radial_out(p.control_points.row(k).transpose()).norm();
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 200; ++k) {
    const double r = radial_out(surface_eval(p, Eigen::Vector2d(u(rng), u(rng))).x).norm();
    CHECK(r >= radii.minCoeff() - 1e-12);
    CHECK(r <= radii.maxCoeff() + 1e-12);
  }
}

TEST_CASE("weight form agrees with the control-point form") {
  Sector s = cylinder_sector(4, 3, 0.25, 0.5);
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (Index k = 0; k < s.x.rows(); ++k) s.x.row(k) += 0.02 * Eigen::RowVector3d(u(rng), u(rng), u(rng));
  Eigen::VectorXd phi(s.x.rows());
  for (Index k = 0; k < phi.size(); ++k) phi(k) = u(rng);
  const ContactInterface iface = make_contact_interface(s.grid, {}, {}, s.x, radial_out, 1.0);
  for (Index p = 0; p < iface.num_patches(); ++p) {
    const BezierPatch bp = interface_patch(iface, p, s.x, phi);
    const Eigen::Vector2d z(u(rng), u(rng));
    const SurfacePoint sp = surface_eval(bp, z);
    const PatchWeights w = patch_weights(iface, p, z);
    Vec3 x = Vec3::Zero();
    double f = 0.0;
    for (std::size_t k = 0; k < w.nodes.size(); ++k) {
      x += w.m(Index(k)) * s.x.row(w.nodes[k]).transpose();
      f += w.m(Index(k)) * phi(w.nodes[k]);
    }
    CHECK((x - sp.x).norm() <= 1e-13);
    CHECK(f == doctest::Approx(sp.phi).epsilon(1e-13));
    CHECK(w.m.sum() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("weight derivatives match finite differences") {
  Sector s = cylinder_sector(3, 3, 0.3, 0.5);
  const ContactInterface iface = make_contact_interface(s.grid, {}, {}, s.x, radial_out, 1.0);
  const Eigen::Vector2d z(0.31, 0.72);
  const double h = 1e-5;
  const PatchWeights w = patch_weights(iface, 4, z);
  for (int a = 0; a < 2; ++a) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e(a) = h;
    const PatchWeights wp = patch_weights(iface, 4, z + e);
    const PatchWeights wm = patch_weights(iface, 4, z - e);
    CHECK(((wp.m - wm.m) / (2 * h) - w.d1[a]).norm() < 1e-8);
    for (int b = 0; b < 2; ++b) {
      CHECK(((wp.d1[b] - wm.d1[b]) / (2 * h) - w.d2[a][b]).norm() < 1e-7);
      for (int c = 0; c < 2; ++c) CHECK(((wp.d2[b][c] - wm.d2[b][c]) / (2 * h) - w.d3[a][b][c]).norm() < 1e-6);
    }
  }
}

TEST_CASE("adjacent patches are continuous") {
  Sector s = cylinder_sector(5, 4, std::numbers::pi / 8, 0.5);
  const ContactInterface iface = make_contact_interface(s.grid, {}, {}, s.x, radial_out, 2.0);
  for (double t : {0.0, 0.3, 0.77, 1.0}) {
    // shared edge between rows 1 and 2 in zeta1 and cols 1 and 2 in zeta2
    const BezierPatch p1 = interface_patch(iface, iface.patch_index(1, 1), s.x, Eigen::VectorXd());
    const BezierPatch p2 = interface_patch(iface, iface.patch_index(2, 1), s.x, Eigen::VectorXd());
    const SurfacePoint a = surface_eval(p1, Eigen::Vector2d(1.0, t));
    const SurfacePoint b = surface_eval(p2, Eigen::Vector2d(0.0, t));
    CHECK((a.x - b.x).norm() <= 1e-10 * 2.0);
    CHECK((a.normal - b.normal).norm() <= 1e-2);
    const BezierPatch p3 = interface_patch(iface, iface.patch_index(1, 2), s.x, Eigen::VectorXd());
    const SurfacePoint c = surface_eval(p1, Eigen::Vector2d(t, 1.0));
    const SurfacePoint d = surface_eval(p3, Eigen::Vector2d(t, 0.0));
    CHECK((c.x - d.x).norm() <= 1e-10 * 2.0);
    CHECK((c.normal - d.normal).norm() <= 1e-2);
  }
}

TEST_CASE("projection onto a planar patch") {
  Sector s;
  s.x.resize(9, 3);
  s.grid.resize(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      s.x.row(3 * i + j) << i - 1.0, j - 1.0, 0.0;
      s.grid(i, j) = 3 * i + j;
    }
  auto up = [](const Vec3&) { return Vec3(0, 0, 1); };
  for (double z : {0.5, -0.01}) {
    NodeCoords x = s.x;
    x.conservativeResize(10, 3);
    x.row(9) << 0.1, -0.2, z;
    const ContactInterface iface = make_contact_interface(s.grid, {9}, {1.0}, x, up, 2.0);
    PenaltyParams pp;
    const ContactPair pair = closest_point_projection(iface, 0, x, Eigen::VectorXd(), pp);
    REQUIRE(pair.projected);
    CHECK(pair.g_n == doctest::Approx(z).epsilon(1e-12));
    CHECK((pair.normal - Vec3(0, 0, 1)).norm() <= 1e-12);
    CHECK((pair.closest - Vec3(0.1, -0.2, 0.0)).norm() <= 1e-10);
  }
}

TEST_CASE("projection onto a smoothed cylinder") {
  Sector s = cylinder_sector(9, 3, std::numbers::pi / 64, 0.5);
  ContactInterface iface = with_slave(s, Vec3(0.9 * std::cos(0.013), 0.6, 0.9 * std::sin(0.013)));
  PenaltyParams pp;
  const ContactPair pair = closest_point_projection(iface, 0, s.x, Eigen::VectorXd(), pp);
  REQUIRE(pair.projected);
  CHECK(std::abs(pair.g_n + 0.1) <= 1e-3);
  // orthogonality of the gap vector to the tangents
  const PatchWeights w = patch_weights(iface, pair.patch, pair.zeta);
  Vec3 t1 = Vec3::Zero(), t2 = Vec3::Zero();
  for (std::size_t k = 0; k < w.nodes.size(); ++k) {
    t1 += w.d1[0](Index(k)) * s.x.row(w.nodes[k]).transpose();
    t2 += w.d1[1](Index(k)) * s.x.row(w.nodes[k]).transpose();
  }
  const Vec3 r = s.x.row(s.x.rows() - 1).transpose() - pair.closest;
  CHECK(std::abs(r.dot(t1)) <= 1e-10 * t1.norm());
  CHECK(std::abs(r.dot(t2)) <= 1e-10 * t2.norm());
}

TEST_CASE("projection hops to the neighbouring patch") {
  Sector s = cylinder_sector(6, 3, 0.2, 0.5);
  ContactInterface iface = with_slave(s, Vec3(0.95 * std::cos(0.41), 0.5, 0.95 * std::sin(0.41)));
  PenaltyParams pp;
  const ContactPair far = closest_point_projection(iface, 0, s.x, Eigen::VectorXd(), pp, iface.patch_index(0, 0));
  const ContactPair near = closest_point_projection(iface, 0, s.x, Eigen::VectorXd(), pp);
  REQUIRE(far.projected);
  REQUIRE(near.projected);
  CHECK(far.patch == near.patch);
  CHECK(far.g_n == doctest::Approx(near.g_n).epsilon(1e-10));
}

namespace {

struct FdSetup {
  Sector s;
  ContactInterface iface;
  Eigen::VectorXd phi;
  PenaltyParams pp;
};

FdSetup fd_setup(unsigned seed, double rho_mech, double rho_el) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  FdSetup f;
  f.s = cylinder_sector(5, 4, 0.3, 0.4);
  for (Index k = 0; k < f.s.x.rows(); ++k) f.s.x.row(k) += 0.01 * Eigen::RowVector3d(u(rng), u(rng), u(rng));
  const double t = 0.05 * u(rng);
  f.iface = with_slave(f.s, Vec3(0.93 * std::cos(t), 0.6 + 0.05 * u(rng), 0.93 * std::sin(t)), 0.2);
  f.phi.resize(f.s.x.rows());
  for (Index k = 0; k < f.phi.size(); ++k) f.phi(k) = u(rng);
  f.pp.rho_mech = rho_mech;
  f.pp.rho_el = rho_el;
  f.pp.projection_tol = 1e-14;
  return f;
}

double pair_energy(const FdSetup& f, const NodeCoords& x, const Eigen::VectorXd& phi, Index hint) {
  const ContactPair p = closest_point_projection(f.iface, 0, x, phi, f.pp, hint);
  REQUIRE(p.projected);
  REQUIRE(p.patch == hint);
  return contact_contribution(f.iface, p, x, phi, f.pp).energy();
}

ContactContribution pair_contribution(const FdSetup& f, const NodeCoords& x, const Eigen::VectorXd& phi, Index hint) {
  const ContactPair p = closest_point_projection(f.iface, 0, x, phi, f.pp, hint);
  REQUIRE(p.projected);
  REQUIRE(p.patch == hint);
  return contact_contribution(f.iface, p, x, phi, f.pp);
}

void perturb(const std::vector<Index>& nodes, int dof, double h, NodeCoords& x, Eigen::VectorXd& phi) {
  const Index node = nodes[static_cast<std::size_t>(dof / 4)];
  if (dof % 4 == 3) {
    phi(node) += h;
  } else {
    x(node, dof % 4) += h;
  }
}

}  // namespace

TEST_CASE("contact residual and tangent match finite differences") {
  for (unsigned seed = 1; seed <= 6; ++seed) {
    FdSetup f = fd_setup(seed, 50.0, 3.0);
    const ContactPair pair = closest_point_projection(f.iface, 0, f.s.x, f.phi, f.pp);
    REQUIRE(pair.projected);
    CHECK(pair.g_n < 0.0);
    const ContactContribution c = contact_contribution(f.iface, pair, f.s.x, f.phi, f.pp);
    const Index nd = c.residual.size();
    Eigen::VectorXd r_fd(nd);
    Eigen::MatrixXd k_fd(nd, nd);
    const double h = 1e-6;
    for (Index i = 0; i < nd; ++i) {
      NodeCoords xp = f.s.x, xm = f.s.x;
      Eigen::VectorXd pp = f.phi, pm = f.phi;
      perturb(c.nodes, int(i), h, xp, pp);
      perturb(c.nodes, int(i), -h, xm, pm);
      r_fd(i) = (pair_energy(f, xp, pp, pair.patch) - pair_energy(f, xm, pm, pair.patch)) / (2 * h);
      k_fd.col(i) = (pair_contribution(f, xp, pp, pair.patch).residual -
                     pair_contribution(f, xm, pm, pair.patch).residual) /
                    (2 * h);
    }
    CHECK((r_fd - c.residual).norm() <= 1e-6 * c.residual.norm());
    CHECK((k_fd - c.stiffness).norm() <= 1e-4 * c.stiffness.norm());
    CHECK((c.stiffness - c.stiffness.transpose()).norm() <= 1e-12 * c.stiffness.norm());
  }
}

TEST_CASE("contact forces balance and fields decouple") {
  FdSetup f = fd_setup(3, 50.0, 3.0);
  const ContactPair pair = closest_point_projection(f.iface, 0, f.s.x, f.phi, f.pp);
  const ContactContribution c = contact_contribution(f.iface, pair, f.s.x, f.phi, f.pp);
  Vec3 sum = Vec3::Zero();
  double fmax = 0.0;
  for (std::size_t a = 0; a < c.nodes.size(); ++a) {
    sum += c.residual.segment<3>(4 * Index(a));
    fmax = std::max(fmax, c.residual.segment<3>(4 * Index(a)).norm());
  }
  CHECK(sum.norm() <= 1e-12 * fmax);

  FdSetup mech = fd_setup(3, 50.0, 0.0);
  const ContactPair pm = closest_point_projection(mech.iface, 0, mech.s.x, mech.phi, mech.pp);
  const ContactContribution cm = contact_contribution(mech.iface, pm, mech.s.x, mech.phi, mech.pp);
  for (std::size_t a = 0; a < cm.nodes.size(); ++a) CHECK(cm.residual(4 * Index(a) + 3) == 0.0);

  // no mechanical penalty and a uniform master potential: no forces
  FdSetup el = fd_setup(3, 0.0, 3.0);
  for (Index k = 0; k + 1 < el.phi.size(); ++k) el.phi(k) = 0.7;
  el.phi(el.phi.size() - 1) = 1.9;
  const ContactPair pe = closest_point_projection(el.iface, 0, el.s.x, el.phi, el.pp);
  const ContactContribution ce = contact_contribution(el.iface, pe, el.s.x, el.phi, el.pp);
  for (std::size_t a = 0; a < ce.nodes.size(); ++a) CHECK(ce.residual.segment<3>(4 * Index(a)).norm() <= 1e-14);
  CHECK(std::abs(ce.residual(3)) > 0.0);
}

TEST_CASE("penalty force and current on a planar interface") {
  NodeCoords x(10, 3);
  Grid g(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      x.row(3 * i + j) << i - 1.0, j - 1.0, 0.0;
      g(i, j) = 3 * i + j;
    }
  const double depth = 0.02, delta = 0.4, area = 0.5;
  x.row(9) << 0.0, 0.0, -depth;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(10);
  phi(9) = delta;
  const ContactInterface iface = make_contact_interface(g, {9}, {area}, x, [](const Vec3&) { return Vec3(0, 0, 1); }, 2.0);
  PenaltyParams pp;
  pp.rho_mech = 1000.0;
  pp.rho_el = 2.0;
  const ContactPair pair = closest_point_projection(iface, 0, x, phi, pp);
  CHECK(pair.g_phi == doctest::Approx(delta));
  const ContactContribution c = contact_contribution(iface, pair, x, phi, pp);
  // slave force pushes out along the normal with magnitude rho * area * depth
  CHECK(c.residual(2) == doctest::Approx(-pp.rho_mech * area * depth));
  CHECK(c.residual(3) == doctest::Approx(-pp.rho_el * area * delta));
  double master_current = 0.0;
  for (std::size_t a = 1; a < c.nodes.size(); ++a) master_current += c.residual(4 * Index(a) + 3);
  CHECK(master_current == doctest::Approx(pp.rho_el * area * delta));
}

TEST_CASE("fiber interfaces orient normals outwards") {
  MeshParams p;
  const RveMesh mesh = generate_fiber_rve(p);
  for (const ContactSurface& cs : mesh.contact_surfaces) {
    const ContactInterface iface = fiber_contact_interface(mesh, cs);
    const PenaltyParams pp = default_penalty(PiezoMaterial::pvdf(), mesh.rve_edge());
    for (std::size_t k = 0; k < iface.slave_nodes.size(); ++k) {
      const ContactPair pair = closest_point_projection(iface, Index(k), mesh.nodes, Eigen::VectorXd(), pp);
      REQUIRE(pair.projected);
      // slave surface bulges away from the master in the reference state
      CHECK(pair.g_n > 0.0);
    }
  }
}
