#pragma once

#include <array>

#include <Eigen/Core>

namespace shapeopt::quadrature {

/// Symmetric 6-point rule on the reference triangle, exact for degree 4.
/// Barycentric coordinates and weights normalized to sum to one, so that
/// sum_q weight[q] * g(x_q) * area approximates the integral over a triangle.
struct TrianglePoint {
  double l0, l1, l2;
  double weight;
};

inline constexpr double kA1 = 0.44594849091596488632;
inline constexpr double kW1 = 0.22338158967801146570;
inline constexpr double kA2 = 0.09157621350977074346;
inline constexpr double kW2 = 0.10995174365532186764;

inline constexpr std::array<TrianglePoint, 6> kDegree4 = {{
    {kA1, kA1, 1.0 - 2.0 * kA1, kW1},
    {kA1, 1.0 - 2.0 * kA1, kA1, kW1},
    {1.0 - 2.0 * kA1, kA1, kA1, kW1},
    {kA2, kA2, 1.0 - 2.0 * kA2, kW2},
    {kA2, 1.0 - 2.0 * kA2, kA2, kW2},
    {1.0 - 2.0 * kA2, kA2, kA2, kW2},
}};

inline constexpr std::size_t kNumPoints = kDegree4.size();

/// Physical coordinates of the quadrature points of triangle (a, b, c).
inline std::array<Eigen::Vector2d, kNumPoints> points(const Eigen::Vector2d& a,
                                                      const Eigen::Vector2d& b,
                                                      const Eigen::Vector2d& c) {
  std::array<Eigen::Vector2d, kNumPoints> out;
  for (std::size_t q = 0; q < kNumPoints; ++q) {
    const auto& t = kDegree4[q];
    out[q] = t.l0 * a + t.l1 * b + t.l2 * c;
  }
  return out;
}

}  // namespace shapeopt::quadrature
