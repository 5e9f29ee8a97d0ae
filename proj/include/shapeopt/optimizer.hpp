#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shapeopt/lms.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/poisson.hpp"
#include "shapeopt/shape_tensor.hpp"

namespace shapeopt {

enum class Termination { Converged, DegenerateMesh, MaxIters, LineSearchFailed };

const char* to_string(Termination termination);

struct OptimizerConfig {
  double p = 2.0;
  int max_outer_iters = 200;
  /// Step sizes 2^k for k in [k_min, k_max].
  int k_min = -20;
  int k_max = 4;
  /// Converged once |η_k - η_{k-1}| <= eta_rel_stop η_k for 3 iterations in a row.
  double eta_rel_stop = 1e-4;
  /// A failed line search counts as convergence when η is below
  /// eta_small_rel times ||K_h||_{L^p}, the size of the shape tensor itself.
  double eta_small_rel = 0.25;
  double translation_tol = 1e-8;
  bool enable_translation_step = true;
  DeformOptions deform;
  LmsControls lms;

  /// Throws ParameterError for inconsistent values.
  void validate() const;
};

/// State of the mesh at the start of one outer iteration. alpha is the step
/// taken from it (0 for the final record).
struct IterationRecord {
  int iter = 0;
  double J = 0.0;
  double eta = 0.0;
  double alpha = 0.0;
  double min_angle = 0.0;
  Point barycenter = Point::Zero();
  /// Rigid shift applied by the translation half-step before this record.
  Vec2 translation = Vec2::Zero();
  bool lms_converged = true;
  /// Largest relative divergence or boundary constraint residual of the
  /// least-mean solution on this mesh.
  double constraint_residual = 0.0;
};

struct IterationReport {
  std::vector<IterationRecord> records;
  Termination termination = Termination::MaxIters;
  /// Non-fatal events: reconstruction fallbacks, translation failures.
  std::vector<std::string> messages;
};

struct OptimizeResult {
  IterationReport report;
  TriangleMesh mesh;
};

struct LineSearchResult {
  bool success = false;
  double alpha = 0.0;
  int k = 0;
  double J = 0.0;
  std::optional<TriangleMesh> mesh;
  int degenerate_candidates = 0;
};

/// α = 2^k minimizing J((id + α θ)(Ω_h)) over k_min..k_max. Degenerate
/// candidates are skipped. Fails when no candidate improves on J0.
LineSearchResult line_search(const TriangleMesh& mesh, const ProblemSpec& spec,
                             const VecP1Field& theta, double J0, int k_min, int k_max,
                             const DeformOptions& deform = {});

struct TranslationResult {
  TriangleMesh mesh;
  Vec2 shift = Vec2::Zero();
  double residual = 0.0;
  int evaluations = 0;
};

/// Rigid shift e with compatibility_residual(Ω_h + e) = 0, by Broyden's
/// method from a finite-difference Jacobian. Tolerance relative to
/// ∫ |f| |∇y_h|. Throws SolverError after 30 evaluations.
TranslationResult translation_step(const TriangleMesh& mesh, const ProblemSpec& spec, double tol);

/// Interior angle of the boundary at a boundary vertex.
double corner_angle(const TriangleMesh& mesh, int vertex);

/// Called after each record is appended; used for progress output.
using IterationCallback = std::function<void(const IterationRecord&)>;

OptimizeResult optimize(const TriangleMesh& initial, const ProblemSpec& spec,
                        const OptimizerConfig& config, const IterationCallback& callback = {});

}  // namespace shapeopt
