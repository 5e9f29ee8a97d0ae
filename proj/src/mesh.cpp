#include "shapeopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>

#include "shapeopt/error.hpp"

namespace shapeopt {

namespace {

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

std::shared_ptr<const MeshTopology> build_topology(int num_vertices,
                                                   std::vector<Triangle> triangles) {
  auto topo = std::make_shared<MeshTopology>();
  const int nt = static_cast<int>(triangles.size());
  topo->triangle_edges.resize(nt);
  topo->triangle_edge_signs.resize(nt);
  topo->vertex_triangles.resize(num_vertices);

  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(static_cast<std::size_t>(nt) * 2);
  for (int t = 0; t < nt; ++t) {
    const Triangle& tri = triangles[t];
    for (int i = 0; i < 3; ++i) {
      if (tri[i] < 0 || tri[i] >= num_vertices) {
        throw ParameterError("triangle " + std::to_string(t) + " references vertex " +
                             std::to_string(tri[i]) + " out of range");
      }
      topo->vertex_triangles[tri[i]].push_back(t);
    }
    for (int i = 0; i < 3; ++i) {
      const int from = tri[(i + 1) % 3];
      const int to = tri[(i + 2) % 3];
      const int lo = std::min(from, to);
      const int hi = std::max(from, to);
      if (lo == hi) throw ParameterError("triangle " + std::to_string(t) + " repeats a vertex");
      auto [it, inserted] = lookup.try_emplace(edge_key(lo, hi), static_cast<int>(topo->edges.size()));
      if (inserted) {
        topo->edges.push_back({lo, hi});
        topo->edge_triangles.push_back({t, -1});
      } else {
        auto& adj = topo->edge_triangles[it->second];
        if (adj[1] >= 0) {
          throw ParameterError("edge (" + std::to_string(lo) + "," + std::to_string(hi) +
                               ") shared by more than two triangles");
        }
        adj[1] = t;
      }
      topo->triangle_edges[t][i] = it->second;
      topo->triangle_edge_signs[t][i] = from < to ? 1 : -1;
    }
  }

  topo->boundary_vertex.assign(num_vertices, false);
  std::vector<int> boundary_degree(num_vertices, 0);
  for (int e = 0; e < static_cast<int>(topo->edges.size()); ++e) {
    const auto& adj = topo->edge_triangles[e];
    if (adj[1] < 0) {
      topo->boundary_edges.push_back(e);
      topo->boundary_vertex[topo->edges[e].a] = true;
      topo->boundary_vertex[topo->edges[e].b] = true;
      ++boundary_degree[topo->edges[e].a];
      ++boundary_degree[topo->edges[e].b];
    } else {
      // Both neighbours must traverse a shared edge in opposite directions.
      const auto sign_in = [&](int t) {
        for (int i = 0; i < 3; ++i)
          if (topo->triangle_edges[t][i] == e) return topo->triangle_edge_signs[t][i];
        return 0;
      };
      if (sign_in(adj[0]) == sign_in(adj[1])) {
        throw ParameterError("inconsistent triangle orientation across edge " + std::to_string(e));
      }
    }
  }
  for (int v = 0; v < num_vertices; ++v) {
    if (topo->vertex_triangles[v].empty()) {
      throw ParameterError("vertex " + std::to_string(v) + " belongs to no triangle");
    }
    if (topo->boundary_vertex[v] && boundary_degree[v] != 2) {
      throw ParameterError("boundary is not a set of closed simple loops at vertex " +
                           std::to_string(v));
    }
  }
  topo->triangles = std::move(triangles);
  return topo;
}

double signed_area_of(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double min_angle_of(const Point& a, const Point& b, const Point& c) {
  const auto angle = [](const Point& p, const Point& q, const Point& r) {
    const Vec2 u = q - p;
    const Vec2 v = r - p;
    return std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
  };
  return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
                           std::optional<CircleBoundary> circle)
    : vertices_(std::move(vertices)), circle_(circle) {
  if (triangles.empty()) throw ParameterError("mesh has no triangles");
  topo_ = build_topology(static_cast<int>(vertices_.size()), std::move(triangles));
  for (int t = 0; t < num_triangles(); ++t) {
    if (!(signed_area(t) > 0.0)) {
      throw ParameterError("triangle " + std::to_string(t) + " has non-positive signed area");
    }
  }
}

TriangleMesh::TriangleMesh(std::vector<Point> vertices, std::shared_ptr<const MeshTopology> topo,
                           std::optional<CircleBoundary> circle)
    : vertices_(std::move(vertices)), topo_(std::move(topo)), circle_(circle) {}

TriangleMesh TriangleMesh::with_vertices(std::vector<Point> vertices,
                                         std::optional<CircleBoundary> circle) const {
  if (vertices.size() != vertices_.size()) {
    throw ParameterError("with_vertices: vertex count mismatch");
  }
  return TriangleMesh(std::move(vertices), topo_, circle);
}

std::vector<BoundaryEdge> TriangleMesh::boundary_edges() const {
  std::vector<BoundaryEdge> out;
  out.reserve(topo_->boundary_edges.size());
  for (int e : topo_->boundary_edges) {
    const int t = topo_->edge_triangles[e][0];
    int local = 0;
    while (topo_->triangle_edges[t][local] != e) ++local;
    const Triangle& tri = topo_->triangles[t];
    // Counterclockwise traversal from tri[local+1] to tri[local+2]; the
    // outward normal is the clockwise rotation of that direction.
    const Vec2 d = vertices_[tri[(local + 2) % 3]] - vertices_[tri[(local + 1) % 3]];
    const double len = d.norm();
    out.push_back({e, t, local, Vec2(d.y(), -d.x()) / len, len});
  }
  return out;
}

double TriangleMesh::signed_area(int t) const {
  const Triangle& tri = topo_->triangles[t];
  return signed_area_of(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

Point TriangleMesh::centroid(int t) const {
  const Triangle& tri = topo_->triangles[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

std::array<Point, 3> TriangleMesh::corners(int t) const {
  const Triangle& tri = topo_->triangles[t];
  return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

TriangleMesh build_regular_polygon(int n_sides, double target_area) {
  if (n_sides < 3) throw ParameterError("regular polygon needs at least 3 sides");
  if (!(target_area > 0.0) || !std::isfinite(target_area)) {
    throw ParameterError("regular polygon area must be positive");
  }
  const double step = 2.0 * std::numbers::pi / n_sides;
  const double r = std::sqrt(2.0 * target_area / (n_sides * std::sin(step)));

  // Vertex 0 is the center, then corners and side midpoints alternate.
  std::vector<Point> vertices{Point(0.0, 0.0)};
  for (int k = 0; k < n_sides; ++k) {
    const Point corner(r * std::cos(k * step), r * std::sin(k * step));
    const Point next(r * std::cos((k + 1) * step), r * std::sin((k + 1) * step));
    vertices.push_back(corner);
    vertices.push_back(0.5 * (corner + next));
  }
  const int nb = 2 * n_sides;
  std::vector<Triangle> triangles;
  for (int k = 0; k < nb; ++k) {
    triangles.push_back({0, 1 + k, 1 + (k + 1) % nb});
  }
  return TriangleMesh(std::move(vertices), std::move(triangles));
}

TriangleMesh build_disk_approximation(double radius, int level) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ParameterError("disk radius must be positive");
  if (level < 0) throw ParameterError("refinement level must be non-negative");
  constexpr int kCorners = 8;
  std::vector<Point> vertices{Point(0.0, 0.0)};
  for (int k = 0; k < kCorners; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / kCorners;
    vertices.emplace_back(radius * std::cos(phi), radius * std::sin(phi));
  }
  std::vector<Triangle> triangles;
  for (int k = 0; k < kCorners; ++k) {
    triangles.push_back({0, 1 + k, 1 + (k + 1) % kCorners});
  }
  TriangleMesh mesh(std::move(vertices), std::move(triangles), CircleBoundary{{0.0, 0.0}, radius});
  for (int l = 0; l < level; ++l) mesh = refine_uniform(mesh);
  return mesh;
}

TriangleMesh refine_uniform(const TriangleMesh& mesh) {
  const int nv = mesh.num_vertices();
  std::vector<Point> vertices = mesh.vertices();
  vertices.reserve(nv + mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges()[e];
    Point mid = 0.5 * (mesh.vertex(edge.a) + mesh.vertex(edge.b));
    if (mesh.circle() && mesh.is_boundary_edge(e)) {
      const CircleBoundary& c = *mesh.circle();
      const Vec2 d = mid - c.center;
      mid = c.center + c.radius * d / d.norm();
    }
    vertices.push_back(mid);
  }
  std::vector<Triangle> triangles;
  triangles.reserve(4 * static_cast<std::size_t>(mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& v = mesh.triangle(t);
    const auto& te = mesh.triangle_edges(t);
    const int m0 = nv + te[0];
    const int m1 = nv + te[1];
    const int m2 = nv + te[2];
    triangles.push_back({v[0], m2, m1});
    triangles.push_back({m2, v[1], m0});
    triangles.push_back({m1, m0, v[2]});
    triangles.push_back({m0, m1, m2});
  }
  return TriangleMesh(std::move(vertices), std::move(triangles), mesh.circle());
}

DeformResult deform(const TriangleMesh& mesh, const std::vector<Vec2>& displacement, double alpha,
                    const DeformOptions& options) {
  if (static_cast<int>(displacement.size()) != mesh.num_vertices()) {
    throw ParameterError("deform: displacement needs one vector per vertex");
  }
  std::vector<Point> moved(mesh.vertices());
  for (std::size_t v = 0; v < moved.size(); ++v) moved[v] += alpha * displacement[v];

  Degeneracy worst{-1, std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity()};
  bool degenerate = false;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const double a = signed_area_of(moved[tri[0]], moved[tri[1]], moved[tri[2]]);
    const double angle = a > 0.0 ? min_angle_of(moved[tri[0]], moved[tri[1]], moved[tri[2]]) : 0.0;
    worst.min_signed_area = std::min(worst.min_signed_area, a);
    if (angle < worst.min_angle) {
      worst.min_angle = angle;
      worst.worst_triangle = t;
    }
    if (!(a > 0.0) || angle < options.min_angle_floor) degenerate = true;
  }
  if (degenerate) return worst;
  return mesh.with_vertices(std::move(moved));
}

TriangleMesh translate(const TriangleMesh& mesh, const Vec2& shift) {
  std::vector<Point> moved(mesh.vertices());
  for (auto& x : moved) x += shift;
  std::optional<CircleBoundary> circle = mesh.circle();
  if (circle) circle->center += shift;
  return mesh.with_vertices(std::move(moved), circle);
}

MeshQuality quality(const TriangleMesh& mesh) {
  MeshQuality q{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                0.0, -1};
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto [a, b, c] = mesh.corners(t);
    const double area_t = signed_area_of(a, b, c);
    const double angle = min_angle_of(a, b, c);
    q.min_signed_area = std::min(q.min_signed_area, area_t);
    if (angle < q.min_angle) {
      q.min_angle = angle;
      q.worst_triangle = t;
    }
    const double la = (b - c).norm();
    const double lb = (c - a).norm();
    const double lc = (a - b).norm();
    const double s = 0.5 * (la + lb + lc);
    const double inradius = std::abs(area_t) / s;
    const double circumradius = la * lb * lc / (4.0 * std::abs(area_t));
    q.max_aspect_ratio = std::max(q.max_aspect_ratio, circumradius / (2.0 * inradius));
  }
  return q;
}

double area(const TriangleMesh& mesh) {
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) total += mesh.signed_area(t);
  return total;
}

Point barycenter(const TriangleMesh& mesh) {
  Point weighted(0.0, 0.0);
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double a = mesh.signed_area(t);
    weighted += a * mesh.centroid(t);
    total += a;
  }
  return weighted / total;
}

double diameter(const TriangleMesh& mesh) {
  double best = 0.0;
  // The diameter of a polygon is attained between boundary vertices.
  std::vector<int> ids;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.is_boundary_vertex(v)) ids.push_back(v);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j)
      best = std::max(best, (mesh.vertex(ids[i]) - mesh.vertex(ids[j])).norm());
  return best;
}

}  // namespace shapeopt
