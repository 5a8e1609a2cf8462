#include "piezohom/mesh.hpp"

#include "piezohom/element.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace piezohom {

namespace {

constexpr double kPi = std::numbers::pi;

/// Point set with tolerance-based deduplication on a hash grid.
class PointMerger {
 public:
  explicit PointMerger(double tol) : tol_(tol), cell_(10.0 * tol) {}

  Index insert(const Eigen::Vector2d& p) {
    const long long cx = std::llround(p.x() / cell_);
    const long long cy = std::llround(p.y() / cell_);
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = grid_.find(key(cx + dx, cy + dy));
        if (it == grid_.end()) continue;
        for (Index id : it->second)
          if ((points_[id] - p).norm() <= tol_) return id;
      }
    }
    const Index id = static_cast<Index>(points_.size());
    points_.push_back(p);
    grid_[key(cx, cy)].push_back(id);
    return id;
  }

  const std::vector<Eigen::Vector2d>& points() const { return points_; }

 private:
  static long long key(long long a, long long b) { return a * 73856093LL ^ b * 19349663LL; }
  double tol_;
  double cell_;
  std::vector<Eigen::Vector2d> points_;
  std::unordered_map<long long, std::vector<Index>> grid_;
};

/// One quadrant of the butterfly cross-section in local coordinates s, t >= 0.
struct QuadrantMesh {
  std::vector<Eigen::Vector2d> points;
  std::vector<std::array<int, 4>> quads;
  std::vector<std::pair<int, double>> arc;  // (point, local angle)
};

double boundary_radius(const MeshParams& p) {
  if (!p.area_preserving) return p.fiber_radius;
  // Quadrant polygon with two edges touching the tangency nodes (radius R)
  // and q-2 edges between bulged nodes at radius r:
  //   1/2 sin(d) (2 R r + (q-2) r^2) = pi R^2 / 4
  const double r0 = p.fiber_radius;
  const int q = p.circumferential / 4;
  const double d = 2.0 * kPi / p.circumferential;
  const double a = q - 2;
  const double b = 2.0 * r0;
  const double c = -kPi * r0 * r0 / (2.0 * std::sin(d));
  if (a == 0.0) return -c / b;
  return (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
}

QuadrantMesh butterfly_quadrant(const MeshParams& p) {
  const int m = p.circumferential / 8;
  const int nr = p.radial;
  const double r0 = p.fiber_radius;
  const double a = p.core_fraction * r0;
  const double rb = boundary_radius(p);

  auto arc_point = [&](int j_of_quarter) -> Eigen::Vector2d {
    // j_of_quarter in [0, 2m] sweeps 0..90 degrees
    if (j_of_quarter == 0) return {r0, 0.0};
    if (j_of_quarter == 2 * m) return {0.0, r0};
    const double alpha = 0.5 * kPi * j_of_quarter / (2.0 * m);
    return {rb * std::cos(alpha), rb * std::sin(alpha)};
  };

  QuadrantMesh q;
  auto add = [&](const Eigen::Vector2d& x) {
    q.points.push_back(x);
    return static_cast<int>(q.points.size() - 1);
  };

  // core (m+1)^2 nodes
  Eigen::MatrixXi core(m + 1, m + 1);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) core(i, j) = add({a * i / m, a * j / m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) q.quads.push_back({core(i, j), core(i + 1, j), core(i + 1, j + 1), core(i, j + 1)});

  // ring towards +s: inner edge s = a, arc 0..45 deg
  Eigen::MatrixXi ring1(m + 1, nr + 1);
  for (int j = 0; j <= m; ++j) {
    const Eigen::Vector2d inner(a, a * j / m);
    const Eigen::Vector2d outer = arc_point(j);
    ring1(j, 0) = core(m, j);
    for (int r = 1; r <= nr; ++r) ring1(j, r) = add(inner + (double(r) / nr) * (outer - inner));
    q.arc.emplace_back(ring1(j, nr), 0.25 * kPi * j / m);
  }
  // ring towards +t: inner edge t = a, arc 90..45 deg; shares the diagonal with ring1
  Eigen::MatrixXi ring2(m + 1, nr + 1);
  for (int j = 0; j <= m; ++j) {
    const Eigen::Vector2d inner(a * j / m, a);
    const Eigen::Vector2d outer = arc_point(2 * m - j);
    ring2(j, 0) = core(j, m);
    for (int r = 1; r <= nr; ++r) {
      if (j == m) {
        ring2(j, r) = ring1(m, r);
      } else {
        ring2(j, r) = add(inner + (double(r) / nr) * (outer - inner));
      }
    }
    if (j < m) q.arc.emplace_back(ring2(j, nr), 0.5 * kPi - 0.25 * kPi * j / m);
  }
  for (int j = 0; j < m; ++j)
    for (int r = 0; r < nr; ++r) {
      q.quads.push_back({ring1(j, r), ring1(j, r + 1), ring1(j + 1, r + 1), ring1(j + 1, r)});
      q.quads.push_back({ring2(j, r), ring2(j + 1, r), ring2(j + 1, r + 1), ring2(j, r + 1)});
    }
  return q;
}

double center_det(const std::array<Index, 8>& conn, const Eigen::Matrix<double, Eigen::Dynamic, 3>& nodes) {
  Eigen::Matrix<double, 8, 3> x;
  for (int a = 0; a < 8; ++a) x.row(a) = nodes.row(conn[a]);
  const ShapeEval<double> s = shape_eval<double>(Vec3::Zero());
  return (s.gradients.transpose() * x).determinant();
}

double wrap_angle(double t) {
  t = std::fmod(t, 2.0 * kPi);
  if (t < 0) t += 2.0 * kPi;
  return t;
}

/// Signed angular offset of a from b in (-pi, pi].
double angle_offset(double a, double b) {
  double d = std::fmod(a - b, 2.0 * kPi);
  if (d > kPi) d -= 2.0 * kPi;
  if (d <= -kPi) d += 2.0 * kPi;
  return d;
}

void tag_faces(RveMesh& mesh) {
  const double tol = 1e-10 * mesh.rve_edge();
  mesh.face_sets.clear();
  for (Face f : kAllFaces) mesh.face_sets[face_name(f)];
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    for (int ax = 0; ax < 3; ++ax) {
      const double x = mesh.nodes(i, ax);
      if (std::abs(x - mesh.cell_min(ax)) <= tol) mesh.face_sets[face_name(static_cast<Face>(2 * ax))].push_back(i);
      if (std::abs(x - mesh.cell_min(ax) - mesh.cell_size(ax)) <= tol)
        mesh.face_sets[face_name(static_cast<Face>(2 * ax + 1))].push_back(i);
    }
  }
}

struct NodeHash3 {
  explicit NodeHash3(double cell) : cell(cell) {}
  long long key(long long a, long long b, long long c) const {
    return (a * 73856093LL) ^ (b * 19349663LL) ^ (c * 83492791LL);
  }
  std::array<long long, 3> cell_of(const Vec3& x) const {
    return {std::llround(x(0) / cell), std::llround(x(1) / cell), std::llround(x(2) / cell)};
  }
  double cell;
  std::unordered_map<long long, std::vector<Index>> buckets;
};

}  // namespace

const char* face_name(Face f) {
  static const char* names[] = {"A-", "A+", "B-", "B+", "C-", "C+"};
  return names[static_cast<int>(f)];
}

double RveMesh::solid_volume() const {
  double v = 0.0;
  for (const auto& conn : elements) {
    Eigen::Matrix<double, 8, 3> x;
    for (int a = 0; a < 8; ++a) x.row(a) = nodes.row(conn[a]);
    for (const Vec3& xi : gauss_points_2x2x2()) v += spatial_gradients(x, xi).det_j;
  }
  return v;
}

const std::vector<Index>& RveMesh::face(Face f) const {
  static const std::vector<Index> empty;
  auto it = face_sets.find(face_name(f));
  return it == face_sets.end() ? empty : it->second;
}

void MeshParams::validate() const {
  if (!(fiber_radius > 0.0)) throw Error("mesh: fiber_radius must be positive");
  if (grid[0] < 1 || grid[1] < 1) throw Error("mesh: fiber grid counts must be >= 1");
  if (circumferential < 8 || circumferential % 8 != 0)
    throw Error("mesh: circumferential divisions must be a positive multiple of 8 so that "
                "tangency and cut lines fall on element edges");
  if (radial < 1 || axial < 1) throw Error("mesh: radial and axial divisions must be >= 1");
  if (!(core_fraction > 0.05 && core_fraction < 0.9)) throw Error("mesh: core_fraction must lie in (0.05, 0.9)");
  if (!(contact_half_angle_deg > 0.0 && contact_half_angle_deg <= 90.0))
    throw Error("mesh: contact_half_angle_deg must lie in (0, 90]");
}

RveMesh generate_fiber_rve(const MeshParams& params) {
  params.validate();
  const double r0 = params.fiber_radius;
  const double pitch = 2.0 * r0;
  const double ly = params.axial_length > 0.0 ? params.axial_length : pitch;
  const int nx = params.grid[0];
  const int nz = params.grid[1];

  RveMesh mesh;
  mesh.fiber_radius = r0;
  mesh.cell_min = Vec3::Zero();
  mesh.cell_size = Vec3(pitch * nx, ly, pitch * nz);

  std::vector<Eigen::Vector2d> centers;
  if (params.layout == FiberLayout::Corner) {
    for (int k = 0; k <= nz; ++k)
      for (int i = 0; i <= nx; ++i) centers.emplace_back(pitch * i, pitch * k);
  } else {
    for (int k = 0; k < nz; ++k)
      for (int i = 0; i < nx; ++i) centers.emplace_back(pitch * (i + 0.5), pitch * (k + 0.5));
  }

  const QuadrantMesh quadrant = butterfly_quadrant(params);
  const double tol = 1e-10 * mesh.rve_edge();
  // quadrant sign patterns: (+,+), (-,+), (-,-), (+,-)
  const std::array<Eigen::Vector2d, 4> signs = {Eigen::Vector2d(1, 1), Eigen::Vector2d(-1, 1),
                                                Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, -1)};

  std::vector<Vec3> all_nodes;
  for (std::size_t f = 0; f < centers.size(); ++f) {
    const Eigen::Vector2d c = centers[f];
    std::array<bool, 4> included{};
    int n_included = 0;
    for (int qd = 0; qd < 4; ++qd) {
      const Eigen::Vector2d far = c + r0 * signs[qd];
      const bool inside = std::min(c.x(), far.x()) >= -tol && std::max(c.x(), far.x()) <= mesh.cell_size(0) + tol &&
                          std::min(c.y(), far.y()) >= -tol && std::max(c.y(), far.y()) <= mesh.cell_size(2) + tol;
      included[qd] = inside;
      n_included += inside;
    }
    if (n_included == 0) continue;

    PointMerger merger(1e-9 * r0);
    std::vector<std::array<Index, 4>> quads;
    std::vector<std::pair<Index, double>> arc;  // (2D point, global angle)
    for (int qd = 0; qd < 4; ++qd) {
      if (!included[qd]) continue;
      std::vector<Index> local(quadrant.points.size());
      for (std::size_t i = 0; i < quadrant.points.size(); ++i)
        local[i] = merger.insert(c + quadrant.points[i].cwiseProduct(signs[qd]));
      for (const auto& qu : quadrant.quads) quads.push_back({local[qu[0]], local[qu[1]], local[qu[2]], local[qu[3]]});
      for (const auto& [pt, alpha] : quadrant.arc) {
        double theta = alpha;
        if (qd == 1) theta = kPi - alpha;
        if (qd == 2) theta = kPi + alpha;
        if (qd == 3) theta = 2.0 * kPi - alpha;
        arc.emplace_back(local[pt], wrap_angle(theta));
      }
    }
    const auto& pts = merger.points();
    const Index n2d = static_cast<Index>(pts.size());
    const Index base = static_cast<Index>(all_nodes.size());
    const int fiber_id = static_cast<int>(mesh.fibers.size());
    for (int layer = 0; layer <= params.axial; ++layer) {
      const double y = ly * layer / params.axial;
      for (const auto& p : pts) {
        all_nodes.emplace_back(p.x(), y, p.y());
        mesh.node_fiber.push_back(fiber_id);
      }
    }
    for (int layer = 0; layer < params.axial; ++layer) {
      for (const auto& qu : quads) {
        std::array<Index, 8> conn{};
        for (int k = 0; k < 4; ++k) {
          conn[k] = base + layer * n2d + qu[k];
          conn[k + 4] = base + (layer + 1) * n2d + qu[k];
        }
        mesh.elements.push_back(conn);
        mesh.element_fiber.push_back(fiber_id);
      }
    }

    // lateral surface rows sorted by angle, starting after a missing quadrant
    std::sort(arc.begin(), arc.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    arc.erase(std::unique(arc.begin(), arc.end(), [](const auto& l, const auto& r) { return l.first == r.first; }),
              arc.end());
    double start = 0.0;
    const bool closed = n_included == 4;
    if (!closed) {
      for (int qd = 0; qd < 4; ++qd)
        if (!included[qd] && included[(qd + 1) % 4]) start = 0.5 * kPi * (qd + 1);
    }
    std::sort(arc.begin(), arc.end(), [&](const auto& l, const auto& r) {
      return wrap_angle(l.second - start + 1e-12) < wrap_angle(r.second - start + 1e-12);
    });
    FiberSurface surf;
    surf.center = c;
    surf.closed = closed;
    surf.nodes.resize(static_cast<Index>(arc.size()), params.axial + 1);
    for (std::size_t j = 0; j < arc.size(); ++j) {
      surf.theta.push_back(arc[j].second);
      for (int layer = 0; layer <= params.axial; ++layer)
        surf.nodes(static_cast<Index>(j), layer) = base + layer * n2d + arc[j].first;
    }
    mesh.fibers.push_back(std::move(surf));
  }

  mesh.nodes.resize(static_cast<Index>(all_nodes.size()), 3);
  for (std::size_t i = 0; i < all_nodes.size(); ++i) mesh.nodes.row(static_cast<Index>(i)) = all_nodes[i].transpose();

  for (auto& conn : mesh.elements) {
    if (center_det(conn, mesh.nodes) < 0.0) {
      std::swap(conn[1], conn[3]);
      std::swap(conn[5], conn[7]);
    }
  }

  tag_faces(mesh);

  // coincident nodes of different fibers are bonded along tangency lines
  NodeHash3 hash(10.0 * tol);
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    const auto cc = hash.cell_of(mesh.node(i));
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        for (long long dz = -1; dz <= 1; ++dz) {
          auto it = hash.buckets.find(hash.key(cc[0] + dx, cc[1] + dy, cc[2] + dz));
          if (it == hash.buckets.end()) continue;
          for (Index j : it->second)
            if (mesh.node_fiber[j] != mesh.node_fiber[i] && (mesh.node(j) - mesh.node(i)).norm() < tol)
              mesh.bond_pairs.emplace_back(j, i);
        }
    hash.buckets[hash.key(cc[0], cc[1], cc[2])].push_back(i);
  }

  mesh.contact_surfaces = identify_contact_interfaces(mesh, params.contact_half_angle_deg);
  return mesh;
}

RveMesh generate_box(const Eigen::Vector3i& n, const Vec3& size) {
  if ((n.array() < 1).any()) throw Error("mesh: box division counts must be >= 1");
  if ((size.array() <= 0.0).any()) throw Error("mesh: box size must be positive");
  RveMesh mesh;
  mesh.cell_size = size;
  const Index nx = n(0) + 1, ny = n(1) + 1, nz = n(2) + 1;
  mesh.nodes.resize(nx * ny * nz, 3);
  auto id = [&](Index i, Index j, Index k) { return i + nx * (j + ny * k); };
  for (Index k = 0; k < nz; ++k)
    for (Index j = 0; j < ny; ++j)
      for (Index i = 0; i < nx; ++i)
        mesh.nodes.row(id(i, j, k)) << size(0) * i / n(0), size(1) * j / n(1), size(2) * k / n(2);
  mesh.node_fiber.assign(static_cast<std::size_t>(mesh.nodes.rows()), 0);
  for (Index k = 0; k < n(2); ++k)
    for (Index j = 0; j < n(1); ++j)
      for (Index i = 0; i < n(0); ++i) {
        mesh.elements.push_back({id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k),
                                 id(i, j, k + 1), id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1), id(i, j + 1, k + 1)});
        mesh.element_fiber.push_back(0);
      }
  tag_faces(mesh);
  return mesh;
}

std::vector<PeriodicPair> identify_periodic_pairs(const RveMesh& mesh) {
  const double tol = 1e-10 * mesh.rve_edge();
  std::vector<PeriodicPair> pairs;
  for (int ax = 0; ax < 3; ++ax) {
    const Face fm = static_cast<Face>(2 * ax);
    const Face fp = static_cast<Face>(2 * ax + 1);
    NodeHash3 hash(10.0 * tol);
    for (Index i : mesh.face(fm)) {
      Vec3 x = mesh.node(i);
      x(ax) = 0.0;
      const auto cc = hash.cell_of(x);
      hash.buckets[hash.key(cc[0], cc[1], cc[2])].push_back(i);
    }
    auto find_partner = [&](Index i) -> Index {
      Vec3 x = mesh.node(i);
      x(ax) = 0.0;
      const auto cc = hash.cell_of(x);
      Index best = -1;
      for (long long dx = -1; dx <= 1; ++dx)
        for (long long dy = -1; dy <= 1; ++dy)
          for (long long dz = -1; dz <= 1; ++dz) {
            auto it = hash.buckets.find(hash.key(cc[0] + dx, cc[1] + dy, cc[2] + dz));
            if (it == hash.buckets.end()) continue;
            for (Index j : it->second) {
              Vec3 y = mesh.node(j);
              y(ax) = 0.0;
              if ((y - x).norm() < tol && (best < 0 || j < best)) best = j;
            }
          }
      return best;
    };
    std::vector<char> minus_matched(static_cast<std::size_t>(mesh.num_nodes()), 0);
    for (Index i : mesh.face(fp)) {
      const Index j = find_partner(i);
      if (j < 0) {
        std::ostringstream msg;
        msg << "mesh: node " << i << " on face " << face_name(fp) << " has no periodic partner on face "
            << face_name(fm);
        throw Error(msg.str());
      }
      minus_matched[static_cast<std::size_t>(j)] = 1;
      pairs.push_back({j, i, ax});
    }
    // every minus-face node needs a coincident representative that was matched
    NodeHash3 plus_hash(10.0 * tol);
    for (Index i : mesh.face(fp)) {
      Vec3 x = mesh.node(i);
      x(ax) = 0.0;
      const auto cc = plus_hash.cell_of(x);
      plus_hash.buckets[plus_hash.key(cc[0], cc[1], cc[2])].push_back(i);
    }
    for (Index i : mesh.face(fm)) {
      if (minus_matched[static_cast<std::size_t>(i)]) continue;
      Vec3 x = mesh.node(i);
      x(ax) = 0.0;
      const auto cc = plus_hash.cell_of(x);
      bool found = false;
      for (long long dx = -1; dx <= 1 && !found; ++dx)
        for (long long dy = -1; dy <= 1 && !found; ++dy)
          for (long long dz = -1; dz <= 1 && !found; ++dz) {
            auto it = plus_hash.buckets.find(plus_hash.key(cc[0] + dx, cc[1] + dy, cc[2] + dz));
            if (it == plus_hash.buckets.end()) continue;
            for (Index j : it->second) {
              Vec3 y = mesh.node(j);
              y(ax) = 0.0;
              if ((y - x).norm() < tol) found = true;
            }
          }
      if (!found) {
        std::ostringstream msg;
        msg << "mesh: node " << i << " on face " << face_name(fm) << " has no periodic partner on face "
            << face_name(fp);
        throw Error(msg.str());
      }
    }
  }
  return pairs;
}

std::vector<ContactSurface> identify_contact_interfaces(const RveMesh& mesh, double half_angle_deg) {
  std::vector<ContactSurface> out;
  const double r0 = mesh.fiber_radius;
  if (mesh.fibers.size() < 2) return out;
  const double half = half_angle_deg * kPi / 180.0;
  const double eps = 1e-9;

  for (std::size_t f = 0; f < mesh.fibers.size(); ++f) {
    for (std::size_t g = f + 1; g < mesh.fibers.size(); ++g) {
      const FiberSurface& master = mesh.fibers[f];
      const FiberSurface& slave = mesh.fibers[g];
      const Eigen::Vector2d d = slave.center - master.center;
      if (std::abs(d.norm() - 2.0 * r0) > 1e-8 * r0) continue;
      if (std::abs(d.x()) > 1e-8 * r0 && std::abs(d.y()) > 1e-8 * r0) continue;
      const double t_master = wrap_angle(std::atan2(d.y(), d.x()));
      const double t_slave = wrap_angle(t_master + kPi);

      // master rows within the window, ordered by angle
      std::vector<std::pair<double, Index>> rows;
      for (std::size_t j = 0; j < master.theta.size(); ++j) {
        const double off = angle_offset(master.theta[j], t_master);
        if (std::abs(off) <= half + eps) rows.emplace_back(off, static_cast<Index>(j));
      }
      std::vector<std::pair<double, Index>> srows;
      for (std::size_t j = 0; j < slave.theta.size(); ++j) {
        const double off = angle_offset(slave.theta[j], t_slave);
        if (std::abs(off) <= half + eps && std::abs(off) > eps) srows.emplace_back(off, static_cast<Index>(j));
      }
      if (rows.empty() || srows.empty()) continue;
      // the tangency line must be present on both fibers within the cell
      const bool tangent_master =
          std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return std::abs(r.first) <= eps; });
      if (!tangent_master) continue;
      std::sort(rows.begin(), rows.end());
      if (rows.size() < 2) {
        std::ostringstream msg;
        msg << "contact: master arc of fiber " << f << " has fewer than 2 rows; widen the contact window";
        throw Error(msg.str());
      }
      const double step = rows[1].first - rows[0].first;
      for (std::size_t k = 1; k < rows.size(); ++k) {
        if (std::abs(rows[k].first - rows[k - 1].first - step) > 1e-6 * std::abs(step) + 1e-12) {
          std::ostringstream msg;
          msg << "contact: master grid of fiber " << f << " is not structured (uneven angular spacing)";
          throw Error(msg.str());
        }
      }

      ContactSurface cs;
      cs.master_fiber = static_cast<int>(f);
      cs.slave_fiber = static_cast<int>(g);
      const Index ncols = master.nodes.cols();
      cs.master_grid.resize(static_cast<Index>(rows.size()), ncols);
      for (std::size_t k = 0; k < rows.size(); ++k) cs.master_grid.row(static_cast<Index>(k)) = master.nodes.row(rows[k].second);

      // lumped lateral area per slave node from the slave fiber's surface quads
      std::unordered_map<Index, double> area;
      const Index nrow = slave.nodes.rows();
      const Index nquad_rows = slave.closed ? nrow : nrow - 1;
      for (Index j = 0; j < nquad_rows; ++j) {
        const Index j1 = (j + 1) % nrow;
        for (Index a = 0; a + 1 < slave.nodes.cols(); ++a) {
          const Vec3 p0 = mesh.node(slave.nodes(j, a));
          const Vec3 p1 = mesh.node(slave.nodes(j1, a));
          const Vec3 p3 = mesh.node(slave.nodes(j, a + 1));
          const double quad_area = (p1 - p0).norm() * (p3 - p0).norm();
          for (Index nid : {slave.nodes(j, a), slave.nodes(j1, a), slave.nodes(j, a + 1), slave.nodes(j1, a + 1)})
            area[nid] += 0.25 * quad_area;
        }
      }
      std::sort(srows.begin(), srows.end());
      for (const auto& [off, j] : srows) {
        for (Index a = 0; a < slave.nodes.cols(); ++a) {
          const Index nid = slave.nodes(j, a);
          cs.slave_nodes.push_back(nid);
          cs.slave_areas.push_back(area[nid]);
        }
      }
      out.push_back(std::move(cs));
    }
  }
  return out;
}

void check_mesh(const RveMesh& mesh) {
  const double l = mesh.rve_edge();
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& conn = mesh.elements[e];
    Eigen::Matrix<double, 8, 3> x;
    for (int a = 0; a < 8; ++a) {
      if (conn[a] < 0 || conn[a] >= mesh.num_nodes()) throw Error("mesh: element node index out of range");
      for (int b = 0; b < a; ++b)
        if (conn[a] == conn[b]) throw Error("mesh: element with repeated node index");
      x.row(a) = mesh.nodes.row(conn[a]);
    }
    for (const Vec3& xi : gauss_points_2x2x2()) {
      try {
        spatial_gradients(x, xi);
      } catch (const Error&) {
        std::ostringstream msg;
        msg << "mesh: element " << e << " has a non-positive Jacobian";
        throw Error(msg.str());
      }
    }
  }
  for (const auto& [a, b] : mesh.bond_pairs)
    if ((mesh.node(a) - mesh.node(b)).norm() >= 1e-10 * l) throw Error("mesh: bond pair nodes are not coincident");
  for (const PeriodicPair& p : identify_periodic_pairs(mesh)) {
    Vec3 diff = mesh.node(p.plus) - mesh.node(p.minus);
    if (std::abs(diff(p.axis) - mesh.cell_size(p.axis)) > 1e-10 * l) throw Error("mesh: periodic pair offset mismatch");
    diff(p.axis) = 0.0;
    if (diff.norm() > 1e-10 * l) throw Error("mesh: periodic pair transverse mismatch");
  }
}

void write_mesh_text(std::ostream& os, const RveMesh& mesh) {
  os.precision(17);
  os << "# piezohom mesh 1\n";
  os << "cell " << mesh.cell_min.transpose() << ' ' << mesh.cell_size.transpose() << '\n';
  os << "fiber_radius " << mesh.fiber_radius << '\n';
  os << "nodes " << mesh.num_nodes() << '\n';
  for (Index i = 0; i < mesh.num_nodes(); ++i)
    os << i << ' ' << mesh.nodes(i, 0) << ' ' << mesh.nodes(i, 1) << ' ' << mesh.nodes(i, 2) << ' '
       << mesh.node_fiber[static_cast<std::size_t>(i)] << '\n';
  os << "elements " << mesh.num_elements() << '\n';
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    os << e;
    for (Index n : mesh.elements[e]) os << ' ' << n;
    os << ' ' << mesh.element_fiber[e] << '\n';
  }
  for (const auto& [name, ids] : mesh.face_sets) {
    os << "set " << name << ' ' << ids.size() << '\n';
    for (std::size_t k = 0; k < ids.size(); ++k) os << ids[k] << (k + 1 == ids.size() ? '\n' : ' ');
  }
  os << "bonds " << mesh.bond_pairs.size() << '\n';
  for (const auto& [a, b] : mesh.bond_pairs) os << a << ' ' << b << '\n';
  os << "contacts " << mesh.contact_surfaces.size() << '\n';
  for (const auto& cs : mesh.contact_surfaces) {
    os << "contact " << cs.master_fiber << ' ' << cs.slave_fiber << ' ' << cs.master_grid.rows() << ' '
       << cs.master_grid.cols() << ' ' << cs.slave_nodes.size() << '\n';
    for (Index r = 0; r < cs.master_grid.rows(); ++r) {
      for (Index c = 0; c < cs.master_grid.cols(); ++c) os << cs.master_grid(r, c) << (c + 1 == cs.master_grid.cols() ? '\n' : ' ');
    }
    for (std::size_t k = 0; k < cs.slave_nodes.size(); ++k) os << cs.slave_nodes[k] << ' ' << cs.slave_areas[k] << '\n';
  }
}

}  // namespace piezohom
