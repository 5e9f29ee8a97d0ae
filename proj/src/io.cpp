#include "shapeopt/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "shapeopt/error.hpp"

namespace shapeopt::io {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_mesh(std::ostream& out, const TriangleMesh& mesh) {
  const auto boundary = mesh.boundary_edges();
  out << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << boundary.size() << '\n';
  for (const Point& x : mesh.vertices()) out << format_double(x.x()) << ' ' << format_double(x.y()) << '\n';
  for (const Triangle& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const BoundaryEdge& be : boundary) {
    const Triangle& t = mesh.triangle(be.triangle);
    out << t[(be.local + 1) % 3] << ' ' << t[(be.local + 2) % 3] << '\n';
  }
}

namespace {

template <typename T>
void read_value(std::istream& in, T& value, const char* what) {
  if (!(in >> value)) throw IoError(std::string("mesh file: could not read ") + what);
}

}  // namespace

TriangleMesh read_mesh(std::istream& in) {
  long nv = 0;
  long nt = 0;
  long nb = 0;
  read_value(in, nv, "header");
  read_value(in, nt, "header");
  read_value(in, nb, "header");
  if (nv < 3 || nt < 1 || nb < 3) throw IoError("mesh file: implausible header counts");
  std::vector<Point> vertices(nv);
  for (auto& x : vertices) {
    read_value(in, x.x(), "vertex coordinate");
    read_value(in, x.y(), "vertex coordinate");
  }
  std::vector<Triangle> triangles(nt);
  for (auto& t : triangles)
    for (int& v : t) read_value(in, v, "triangle index");
  std::set<std::pair<int, int>> listed;
  for (long k = 0; k < nb; ++k) {
    int a = 0;
    int b = 0;
    read_value(in, a, "boundary edge");
    read_value(in, b, "boundary edge");
    listed.emplace(a, b);
  }
  std::string rest;
  if (in >> rest) throw IoError("mesh file: trailing content '" + rest + "'");

  try {
    TriangleMesh mesh(std::move(vertices), std::move(triangles));
    std::set<std::pair<int, int>> actual;
    for (const BoundaryEdge& be : mesh.boundary_edges()) {
      const Triangle& t = mesh.triangle(be.triangle);
      actual.emplace(t[(be.local + 1) % 3], t[(be.local + 2) % 3]);
    }
    if (actual != listed) throw IoError("mesh file: boundary edge list does not match the triangulation");
    return mesh;
  } catch (const ParameterError& e) {
    throw IoError(std::string("mesh file: ") + e.what());
  }
}

void write_mesh_file(const std::string& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_mesh(out, mesh);
  if (!out) throw IoError("write to '" + path + "' failed");
}

TriangleMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_mesh(in);
}

void write_rt0_field(std::ostream& out, const RT0MatrixField& S) {
  for (Eigen::Index e = 0; e < S.rows[0].size(); ++e)
    for (int r = 0; r < 2; ++r) out << e << ' ' << r << ' ' << format_double(S.rows[r](e)) << '\n';
}

void write_p1_field(std::ostream& out, const VecP1Field& field) {
  for (std::size_t v = 0; v < field.values.size(); ++v) {
    out << v << ' ' << format_double(field.values[v].x()) << ' ' << format_double(field.values[v].y())
        << '\n';
  }
}

void write_report_csv(std::ostream& out, const IterationReport& report) {
  out << "iter,J,eta,alpha,min_angle,barycenter_x,barycenter_y\n";
  for (const IterationRecord& r : report.records) {
    out << r.iter << ',' << format_double(r.J) << ',' << format_double(r.eta) << ','
        << format_double(r.alpha) << ',' << format_double(r.min_angle) << ','
        << format_double(r.barycenter.x()) << ',' << format_double(r.barycenter.y()) << '\n';
  }
  out << "# termination=" << to_string(report.termination) << '\n';
}

}  // namespace shapeopt::io
