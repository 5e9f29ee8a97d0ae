#pragma once

#include <array>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace shapeopt {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Vertex triple in counterclockwise order.
using Triangle = std::array<int, 3>;

/// Globally oriented edge, first vertex index lower than the second.
struct Edge {
  int a;
  int b;
};

/// Edge on the boundary of the triangulation, together with its single
/// adjacent triangle and outward unit normal.
struct BoundaryEdge {
  int edge;
  int triangle;
  int local;  ///< local edge index inside `triangle` (opposite vertex)
  Vec2 normal;
  double length;
};

/// Marker telling refinement to project new boundary midpoints onto a circle.
struct CircleBoundary {
  Point center{0.0, 0.0};
  double radius = 1.0;
};

struct MeshQuality {
  double min_angle = 0.0;        ///< radians
  double min_signed_area = 0.0;  ///< smallest signed triangle area
  double max_aspect_ratio = 0.0; ///< circumradius / (2 inradius), 1 for equilateral
  int worst_triangle = -1;       ///< triangle attaining min_angle
};

/// Connectivity shared between meshes that differ only by vertex positions.
struct MeshTopology {
  std::vector<Triangle> triangles;
  std::vector<Edge> edges;
  /// Edge i of a triangle is the one opposite its local vertex i.
  std::vector<std::array<int, 3>> triangle_edges;
  /// +1 where the counterclockwise traversal of the triangle runs along the
  /// global edge direction (low -> high), -1 otherwise.
  std::vector<std::array<int, 3>> triangle_edge_signs;
  /// Adjacent triangles of each edge; second entry is -1 on the boundary.
  std::vector<std::array<int, 2>> edge_triangles;
  std::vector<int> boundary_edges;  ///< edge indices, in discovery order
  std::vector<bool> boundary_vertex;
  /// Triangles incident to each vertex.
  std::vector<std::vector<int>> vertex_triangles;
};

/// Conforming triangulation of a polygonal domain. Immutable; every
/// operation that changes geometry returns a new mesh.
class TriangleMesh {
 public:
  /// Builds connectivity and validates the triangulation. Throws
  /// ParameterError on non-positive areas, non-manifold edges or open
  /// boundary loops.
  TriangleMesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
               std::optional<CircleBoundary> circle = std::nullopt);

  /// Same connectivity, new vertex positions. No validation.
  [[nodiscard]] TriangleMesh with_vertices(std::vector<Point> vertices,
                                           std::optional<CircleBoundary> circle = std::nullopt) const;

  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices_.size()); }
  [[nodiscard]] int num_triangles() const { return static_cast<int>(topo_->triangles.size()); }
  [[nodiscard]] int num_edges() const { return static_cast<int>(topo_->edges.size()); }
  [[nodiscard]] int num_boundary_edges() const {
    return static_cast<int>(topo_->boundary_edges.size());
  }

  [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
  [[nodiscard]] const Point& vertex(int v) const { return vertices_[v]; }
  [[nodiscard]] const std::vector<Triangle>& triangles() const { return topo_->triangles; }
  [[nodiscard]] const Triangle& triangle(int t) const { return topo_->triangles[t]; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return topo_->edges; }
  [[nodiscard]] const std::array<int, 3>& triangle_edges(int t) const {
    return topo_->triangle_edges[t];
  }
  [[nodiscard]] const std::array<int, 3>& triangle_edge_signs(int t) const {
    return topo_->triangle_edge_signs[t];
  }
  [[nodiscard]] const std::array<int, 2>& edge_triangles(int e) const {
    return topo_->edge_triangles[e];
  }
  [[nodiscard]] bool is_boundary_edge(int e) const { return topo_->edge_triangles[e][1] < 0; }
  [[nodiscard]] bool is_boundary_vertex(int v) const { return topo_->boundary_vertex[v]; }
  [[nodiscard]] const std::vector<int>& vertex_triangles(int v) const {
    return topo_->vertex_triangles[v];
  }
  [[nodiscard]] const std::optional<CircleBoundary>& circle() const { return circle_; }
  [[nodiscard]] const MeshTopology& topology() const { return *topo_; }

  /// Boundary edges with outward normals for the current vertex positions.
  [[nodiscard]] std::vector<BoundaryEdge> boundary_edges() const;

  [[nodiscard]] double signed_area(int t) const;
  [[nodiscard]] Point centroid(int t) const;
  /// Corner coordinates of triangle t, in counterclockwise order.
  [[nodiscard]] std::array<Point, 3> corners(int t) const;

 private:
  TriangleMesh(std::vector<Point> vertices, std::shared_ptr<const MeshTopology> topo,
               std::optional<CircleBoundary> circle);

  std::vector<Point> vertices_;
  std::shared_ptr<const MeshTopology> topo_;
  std::optional<CircleBoundary> circle_;
};

/// Regular n-gon centered at the origin with a corner at angle 0, scaled to
/// the given area. Every side is split at its midpoint and the polygon is
/// fanned from the center, giving 2n triangles.
TriangleMesh build_regular_polygon(int n_sides, double target_area);

/// Inscribed 8-gon fan of the circle |x| = radius, refined `level` times with
/// boundary midpoints projected onto the circle (8 * 4^level triangles).
TriangleMesh build_disk_approximation(double radius, int level);

/// Red refinement: every triangle split into four at its edge midpoints.
TriangleMesh refine_uniform(const TriangleMesh& mesh);

/// Report produced when a deformation inverts or flattens a triangle.
struct Degeneracy {
  int worst_triangle = -1;
  double min_angle = 0.0;
  double min_signed_area = 0.0;
};

struct DeformOptions {
  double min_angle_floor = 2.0 * 3.14159265358979323846 / 180.0;
};

using DeformResult = std::variant<TriangleMesh, Degeneracy>;

/// Moves every vertex x to x + alpha * displacement(x).
DeformResult deform(const TriangleMesh& mesh, const std::vector<Vec2>& displacement,
                    double alpha, const DeformOptions& options = {});

/// Rigid translation; keeps the circle marker consistent.
TriangleMesh translate(const TriangleMesh& mesh, const Vec2& shift);

MeshQuality quality(const TriangleMesh& mesh);
double area(const TriangleMesh& mesh);
/// Area-weighted centroid.
Point barycenter(const TriangleMesh& mesh);
/// Largest distance between two vertices.
double diameter(const TriangleMesh& mesh);

}  // namespace shapeopt
