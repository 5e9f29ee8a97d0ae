#pragma once

#include <iosfwd>
#include <string>

#include "shapeopt/lms.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/optimizer.hpp"
#include "shapeopt/shape_tensor.hpp"

namespace shapeopt::io {

/// Decimal with 17 significant digits; round-trips every double.
std::string format_double(double value);

/// Mesh text format:
///   nv nt nb
///   x y            (nv lines)
///   i j k          (nt lines, counterclockwise, 0-based)
///   i j            (nb lines, boundary edges traversed with the domain on the left)
void write_mesh(std::ostream& out, const TriangleMesh& mesh);
/// Throws IoError on malformed input or when the listed boundary edges do
/// not match the boundary of the triangulation.
TriangleMesh read_mesh(std::istream& in);
void write_mesh_file(const std::string& path, const TriangleMesh& mesh);
TriangleMesh read_mesh_file(const std::string& path);

/// "edge_index row coeff" per line.
void write_rt0_field(std::ostream& out, const RT0MatrixField& S);
/// "vertex x y" per line.
void write_p1_field(std::ostream& out, const VecP1Field& field);

/// CSV with header iter,J,eta,alpha,min_angle,barycenter_x,barycenter_y and
/// a trailing "# termination=<status>" line.
void write_report_csv(std::ostream& out, const IterationReport& report);

}  // namespace shapeopt::io
