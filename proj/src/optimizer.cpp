#include "shapeopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "shapeopt/error.hpp"
#include "shapeopt/reconstruct.hpp"

namespace shapeopt {

const char* to_string(Termination termination) {
  switch (termination) {
    case Termination::Converged: return "converged";
    case Termination::DegenerateMesh: return "degenerate_mesh";
    case Termination::MaxIters: return "max_iters";
    case Termination::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

void OptimizerConfig::validate() const {
  if (!(p > 1.0 && p <= 2.0)) throw ParameterError("optimizer: p must lie in (1, 2]");
  if (max_outer_iters < 0) throw ParameterError("optimizer: max_outer_iters must be non-negative");
  if (k_min > k_max) throw ParameterError("optimizer: empty step exponent range");
  if (!(eta_rel_stop > 0.0) || !(translation_tol > 0.0) || !(eta_small_rel >= 0.0)) {
    throw ParameterError("optimizer: tolerances must be positive");
  }
  if (!(deform.min_angle_floor >= 0.0)) throw ParameterError("optimizer: negative angle floor");
}

LineSearchResult line_search(const TriangleMesh& mesh, const ProblemSpec& spec,
                             const VecP1Field& theta, double J0, int k_min, int k_max,
                             const DeformOptions& deform_options) {
  LineSearchResult best;
  best.J = J0;
  for (int k = k_max; k >= k_min; --k) {
    const double alpha = std::ldexp(1.0, k);
    DeformResult candidate = deform(mesh, theta.values, alpha, deform_options);
    if (std::holds_alternative<Degeneracy>(candidate)) {
      ++best.degenerate_candidates;
      continue;
    }
    TriangleMesh& moved = std::get<TriangleMesh>(candidate);
    const double J = evaluate_J(moved, spec, solve_state(moved, spec));
    if (J < best.J) {
      best.success = true;
      best.alpha = alpha;
      best.k = k;
      best.J = J;
      best.mesh = std::move(moved);
    }
  }
  return best;
}

namespace {

struct CompatibilityEval {
  Vec2 residual;
  double scale;
};

CompatibilityEval compatibility_at(const TriangleMesh& mesh, const ProblemSpec& spec) {
  const StateAdjoint sa = solve_state_adjoint(mesh, spec);
  const auto gy = gradient_p0(mesh, sa.y);
  double scale = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto [p0, p1, p2] = mesh.corners(t);
    const auto xq = quadrature::points(p0, p1, p2);
    double f_abs = 0.0;
    for (std::size_t q = 0; q < quadrature::kNumPoints; ++q)
      f_abs += quadrature::kDegree4[q].weight * std::abs(spec.f(xq[q]));
    scale += mesh.signed_area(t) * f_abs * gy[t].norm();
  }
  return {compatibility_residual(mesh, spec, sa.y), scale};
}

}  // namespace

TranslationResult translation_step(const TriangleMesh& mesh, const ProblemSpec& spec, double tol) {
  constexpr int kMaxEvaluations = 30;
  TranslationResult out{mesh, Vec2::Zero(), 0.0, 0};
  CompatibilityEval r = compatibility_at(mesh, spec);
  out.evaluations = 1;
  out.residual = r.residual.norm();
  const double target = tol * (r.scale > 0.0 ? r.scale : 1.0);
  if (out.residual <= target) return out;

  // Finite-difference Jacobian, then Broyden updates.
  const double h = 1e-4 * diameter(mesh);
  Mat2 jac;
  for (int c = 0; c < 2; ++c) {
    const Vec2 e = h * Vec2::Unit(c);
    jac.col(c) = (compatibility_at(translate(mesh, e), spec).residual - r.residual) / h;
  }
  out.evaluations += 2;

  Vec2 shift = Vec2::Zero();
  Vec2 residual = r.residual;
  while (out.evaluations < kMaxEvaluations) {
    const Eigen::FullPivLU<Mat2> lu(jac);
    if (!lu.isInvertible()) break;
    Vec2 step = -lu.solve(residual);
    // Trust region: the residual is only piecewise smooth when f jumps.
    const double max_step = 0.25 * diameter(mesh);
    if (step.norm() > max_step) step *= max_step / step.norm();
    const Vec2 next_shift = shift + step;
    const TriangleMesh moved = translate(mesh, next_shift);
    const CompatibilityEval next = compatibility_at(moved, spec);
    ++out.evaluations;
    const Vec2 dr = next.residual - residual;
    jac += (dr - jac * step) * step.transpose() / step.squaredNorm();
    shift = next_shift;
    residual = next.residual;
    if (residual.norm() <= target) {
      out.mesh = moved;
      out.shift = shift;
      out.residual = residual.norm();
      return out;
    }
  }
  std::ostringstream msg;
  msg << "translation step did not converge after " << out.evaluations
      << " evaluations, last residual " << residual.norm();
  throw SolverError(msg.str());
}

double corner_angle(const TriangleMesh& mesh, int vertex) {
  if (vertex < 0 || vertex >= mesh.num_vertices()) throw ParameterError("corner_angle: no such vertex");
  if (!mesh.is_boundary_vertex(vertex)) throw ParameterError("corner_angle: vertex is not on the boundary");
  double angle = 0.0;
  for (int t : mesh.vertex_triangles(vertex)) {
    const Triangle& tri = mesh.triangle(t);
    int local = 0;
    while (tri[local] != vertex) ++local;
    const Vec2 a = mesh.vertex(tri[(local + 1) % 3]) - mesh.vertex(vertex);
    const Vec2 b = mesh.vertex(tri[(local + 2) % 3]) - mesh.vertex(vertex);
    angle += std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
  }
  return angle;
}

OptimizeResult optimize(const TriangleMesh& initial, const ProblemSpec& spec,
                        const OptimizerConfig& config, const IterationCallback& callback) {
  config.validate();
  OptimizeResult result{IterationReport{}, initial};
  IterationReport& report = result.report;
  TriangleMesh& mesh = result.mesh;

  double previous_eta = std::numeric_limits<double>::quiet_NaN();
  int stagnant = 0;
  const auto emit = [&](const IterationRecord& rec) {
    report.records.push_back(rec);
    if (callback) callback(rec);
  };

  for (int iter = 0;; ++iter) {
    IterationRecord rec;
    rec.iter = iter;
    if (config.enable_translation_step) {
      try {
        TranslationResult moved = translation_step(mesh, spec, config.translation_tol);
        rec.translation = moved.shift;
        mesh = std::move(moved.mesh);
      } catch (const SolverError& e) {
        report.messages.push_back("iteration " + std::to_string(iter) + ": " + e.what());
      }
    }

    const StateAdjoint sa = solve_state_adjoint(mesh, spec);
    const std::vector<Mat2> K = assemble_K_field(mesh, sa.u, sa.y);
    const ConstraintRhs rhs = assemble_constraint_rhs(mesh, spec, sa.u, sa.y);
    const LmsSolution solution = solve_p(mesh, K, rhs, config.p, config.lms);
    rec.J = evaluate_J(mesh, spec, sa.u);
    rec.eta = solution.eta;
    rec.lms_converged = solution.converged;
    rec.constraint_residual = std::max(solution.divergence_residual, solution.boundary_residual);
    rec.min_angle = quality(mesh).min_angle;
    rec.barycenter = barycenter(mesh);
    double k_norm = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t)
      k_norm += mesh.signed_area(t) * std::pow(K[t].norm(), config.p);
    k_norm = std::pow(k_norm, 1.0 / config.p);

    if (iter > 0 && std::abs(rec.eta - previous_eta) <= config.eta_rel_stop * rec.eta) {
      ++stagnant;
    } else {
      stagnant = 0;
    }
    previous_eta = rec.eta;
    if (stagnant >= 3) {
      report.termination = Termination::Converged;
      emit(rec);
      break;
    }
    if (iter >= config.max_outer_iters) {
      report.termination = Termination::MaxIters;
      emit(rec);
      break;
    }

    const Reconstruction theta = reconstruct_deformation(mesh, solution, K, config.p, config.lms.eps_rel);
    if (theta.fallback_count > 0) {
      report.messages.push_back("iteration " + std::to_string(iter) + ": " +
                                std::to_string(theta.fallback_count) +
                                " local gradient fits fell back to the mean");
    }
    LineSearchResult step =
        line_search(mesh, spec, theta.theta, rec.J, config.k_min, config.k_max, config.deform);
    if (!step.success) {
      if (rec.eta <= config.eta_small_rel * k_norm) {
        report.termination = Termination::Converged;
      } else if (step.degenerate_candidates > 0) {
        report.termination = Termination::DegenerateMesh;
      } else {
        report.termination = Termination::LineSearchFailed;
      }
      emit(rec);
      break;
    }
    rec.alpha = step.alpha;
    emit(rec);
    mesh = std::move(*step.mesh);
  }
  return result;
}

}  // namespace shapeopt
