#include <sstream>
#include <string>

#include "doctest.h"
#include "shapeopt/error.hpp"
#include "shapeopt/io.hpp"

using namespace shapeopt;

TEST_CASE("doubles round-trip through text") {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0}) CHECK(std::stod(io::format_double(v)) == v);
}

TEST_CASE("mesh round-trip is bit exact") {
  const TriangleMesh m = refine_uniform(build_disk_approximation(1.3, 1));
  std::stringstream buf;
  io::write_mesh(buf, m);
  const TriangleMesh back = io::read_mesh(buf);
  REQUIRE(back.num_vertices() == m.num_vertices());
  REQUIRE(back.num_triangles() == m.num_triangles());
  CHECK(back.num_boundary_edges() == m.num_boundary_edges());
  for (int v = 0; v < m.num_vertices(); ++v) CHECK(back.vertex(v) == m.vertex(v));
  for (int t = 0; t < m.num_triangles(); ++t) CHECK(back.triangle(t) == m.triangle(t));
  std::stringstream again;
  io::write_mesh(again, back);
  std::stringstream first;
  io::write_mesh(first, m);
  CHECK(again.str() == first.str());
}

TEST_CASE("malformed mesh input is rejected") {
  const auto rejects = [](const std::string& text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(io::read_mesh(in), IoError);
  };
  const std::string header = "3 1 3\n";
  const std::string verts = "0 0\n1 0\n0 1\n";
  rejects("");
  rejects("3 1\n");
  rejects("-3 1 3\n");
  rejects(header + "0 0\n1 0\n");
  rejects(header + verts + "0 1 7\n0 1\n1 2\n2 0\n");
  rejects(header + verts + "0 1 2\n0 1\n1 2\n");
  rejects(header + verts + "0 1 2\n0 1\n1 2\n2 0\nextra\n");
  rejects(header + verts + "0 1 2\n0 1\nx 2\n2 0\n");
  // Boundary list does not match the triangulation.
  rejects(header + verts + "0 1 2\n0 1\n1 2\n0 2\n");
  // Clockwise triangle.
  rejects(header + verts + "0 2 1\n0 2\n2 1\n1 0\n");

  std::istringstream ok(header + verts + "0 1 2\n0 1\n1 2\n2 0\n");
  const TriangleMesh m = io::read_mesh(ok);
  CHECK(m.num_triangles() == 1);
  CHECK(area(m) == doctest::Approx(0.5));
}

TEST_CASE("missing files raise IoError") {
  CHECK_THROWS_AS(io::read_mesh_file("/nonexistent/dir/x.mesh"), IoError);
  CHECK_THROWS_AS(io::write_mesh_file("/nonexistent/dir/x.mesh", build_regular_polygon(4, 2.0)), IoError);
}

TEST_CASE("report CSV layout") {
  IterationReport report;
  IterationRecord r0;
  r0.iter = 0;
  r0.J = -0.1;
  r0.eta = 0.5;
  r0.alpha = 0.25;
  r0.min_angle = 0.5;
  r0.barycenter = Point(0.0, -1.5);
  IterationRecord r1 = r0;
  r1.iter = 1;
  r1.alpha = 0.0;
  report.records = {r0, r1};
  report.termination = Termination::Converged;
  std::ostringstream out;
  io::write_report_csv(out, report);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "iter,J,eta,alpha,min_angle,barycenter_x,barycenter_y");
  std::getline(lines, line);
  CHECK(line.rfind("0,", 0) == 0);
  CHECK(line.find("0.25") != std::string::npos);
  std::getline(lines, line);
  CHECK(line.rfind("1,", 0) == 0);
  std::getline(lines, line);
  CHECK(line == "# termination=converged");
  CHECK_FALSE(std::getline(lines, line));
}

TEST_CASE("field writers emit one line per entry") {
  const TriangleMesh m = build_regular_polygon(4, 2.0);
  RT0MatrixField S;
  S.rows = {Eigen::VectorXd::LinSpaced(m.num_edges(), 0, 1), Eigen::VectorXd::Zero(m.num_edges())};
  std::ostringstream rt;
  io::write_rt0_field(rt, S);
  VecP1Field f;
  f.values = m.vertices();
  std::ostringstream p1;
  io::write_p1_field(p1, f);
  const auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
  CHECK(count(rt.str()) == 2 * m.num_edges());
  CHECK(count(p1.str()) == m.num_vertices());
}
