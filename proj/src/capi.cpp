#include "shapeopt.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "shapeopt/analytic_check.hpp"
#include "shapeopt/error.hpp"
#include "shapeopt/io.hpp"
#include "shapeopt/lms.hpp"
#include "shapeopt/optimizer.hpp"
#include "shapeopt/problems.hpp"

struct so_mesh {
  shapeopt::TriangleMesh mesh;
};

struct so_report {
  shapeopt::IterationReport report;
};

namespace {

thread_local std::string last_error;

so_status fail(so_status status, const char* message) {
  last_error = message;
  return status;
}

template <typename F>
so_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return SO_OK;
  } catch (const shapeopt::ParameterError& e) {
    return fail(SO_ERR_PARAM, e.what());
  } catch (const shapeopt::DomainError& e) {
    return fail(SO_ERR_PARAM, e.what());
  } catch (const shapeopt::SolverError& e) {
    return fail(SO_ERR_SOLVER, e.what());
  } catch (const shapeopt::IoError& e) {
    return fail(SO_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SO_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SO_ERR_INTERNAL, "unknown error");
  }
}

void require(bool condition, const char* message) {
  if (!condition) throw shapeopt::ParameterError(message);
}

so_iteration_record to_c(const shapeopt::IterationRecord& r) {
  return {r.iter, r.J, r.eta, r.alpha, r.min_angle, r.barycenter.x(), r.barycenter.y()};
}

}  // namespace

extern "C" {

const char* so_last_error(void) { return last_error.c_str(); }

const char* so_version(void) { return "0.1.0"; }

so_status so_mesh_regular_polygon(int n_sides, double area, so_mesh** out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = new so_mesh{shapeopt::build_regular_polygon(n_sides, area)};
  });
}

so_status so_mesh_disk(double radius, int level, so_mesh** out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = new so_mesh{shapeopt::build_disk_approximation(radius, level)};
  });
}

so_status so_mesh_refine(const so_mesh* mesh, so_mesh** out) {
  return guarded([&] {
    require(mesh != nullptr && out != nullptr, "null pointer argument");
    *out = new so_mesh{shapeopt::refine_uniform(mesh->mesh)};
  });
}

so_status so_mesh_read(const char* path, so_mesh** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null pointer argument");
    *out = new so_mesh{shapeopt::io::read_mesh_file(path)};
  });
}

so_status so_mesh_write(const so_mesh* mesh, const char* path) {
  return guarded([&] {
    require(mesh != nullptr && path != nullptr, "null pointer argument");
    shapeopt::io::write_mesh_file(path, mesh->mesh);
  });
}

void so_mesh_free(so_mesh* mesh) { delete mesh; }

so_status so_mesh_get_info(const so_mesh* mesh, so_mesh_info* info) {
  return guarded([&] {
    require(mesh != nullptr && info != nullptr, "null pointer argument");
    const auto& m = mesh->mesh;
    const auto center = shapeopt::barycenter(m);
    *info = {m.num_vertices(), m.num_triangles(), m.num_edges(), m.num_boundary_edges(),
             shapeopt::area(m), shapeopt::quality(m).min_angle, center.x(), center.y()};
  });
}

so_status so_mesh_vertex(const so_mesh* mesh, int vertex, double* x, double* y) {
  return guarded([&] {
    require(mesh != nullptr && x != nullptr && y != nullptr, "null pointer argument");
    require(vertex >= 0 && vertex < mesh->mesh.num_vertices(), "vertex index out of range");
    *x = mesh->mesh.vertex(vertex).x();
    *y = mesh->mesh.vertex(vertex).y();
  });
}

so_status so_mesh_corner_angle(const so_mesh* mesh, int vertex, double* angle) {
  return guarded([&] {
    require(mesh != nullptr && angle != nullptr, "null pointer argument");
    *angle = shapeopt::corner_angle(mesh->mesh, vertex);
  });
}

so_status so_stationarity(const so_mesh* mesh, const char* problem, double p,
                          so_stationarity_result* out) {
  return guarded([&] {
    require(mesh != nullptr && problem != nullptr && out != nullptr, "null pointer argument");
    const auto spec = shapeopt::problems::by_name(problem);
    const auto& m = mesh->mesh;
    const auto sa = shapeopt::solve_state_adjoint(m, spec);
    const auto K = shapeopt::assemble_K_field(m, sa.u, sa.y);
    const auto rhs = shapeopt::assemble_constraint_rhs(m, spec, sa.u, sa.y);
    const auto sol = shapeopt::solve_p(m, K, rhs, p);
    *out = {sol.eta, shapeopt::evaluate_J(m, spec, sa.u), sol.iterations, sol.converged ? 1 : 0,
            sol.kkt_residual, sol.divergence_residual, sol.boundary_residual};
  });
}

void so_optimizer_config_default(so_optimizer_config* config) {
  if (config == nullptr) return;
  const shapeopt::OptimizerConfig d;
  *config = {d.p,
             d.max_outer_iters,
             d.k_min,
             d.k_max,
             d.eta_rel_stop,
             d.eta_small_rel,
             d.translation_tol,
             d.deform.min_angle_floor * 180.0 / M_PI,
             d.enable_translation_step ? 1 : 0};
}

so_status so_optimize(const so_mesh* initial, const char* problem, const so_optimizer_config* config,
                      so_iteration_callback callback, void* user, so_report** report,
                      so_mesh** final_mesh) {
  return guarded([&] {
    require(initial != nullptr && problem != nullptr && config != nullptr && report != nullptr &&
                final_mesh != nullptr,
            "null pointer argument");
    shapeopt::OptimizerConfig cfg;
    cfg.p = config->p;
    cfg.max_outer_iters = config->max_outer_iters;
    cfg.k_min = config->k_min;
    cfg.k_max = config->k_max;
    cfg.eta_rel_stop = config->eta_rel_stop;
    cfg.eta_small_rel = config->eta_small_rel;
    cfg.translation_tol = config->translation_tol;
    cfg.deform.min_angle_floor = config->min_angle_floor_deg * M_PI / 180.0;
    cfg.enable_translation_step = config->enable_translation_step != 0;
    const auto spec = shapeopt::problems::by_name(problem);
    shapeopt::IterationCallback cb;
    if (callback != nullptr) {
      cb = [callback, user](const shapeopt::IterationRecord& r) {
        const so_iteration_record rec = to_c(r);
        callback(&rec, user);
      };
    }
    auto result = shapeopt::optimize(initial->mesh, spec, cfg, cb);
    auto* rep = new so_report{std::move(result.report)};
    try {
      *final_mesh = new so_mesh{std::move(result.mesh)};
    } catch (...) {
      delete rep;
      throw;
    }
    *report = rep;
  });
}

int so_report_num_records(const so_report* report) {
  return report == nullptr ? 0 : static_cast<int>(report->report.records.size());
}

so_status so_report_record(const so_report* report, int index, so_iteration_record* out) {
  return guarded([&] {
    require(report != nullptr && out != nullptr, "null pointer argument");
    require(index >= 0 && index < so_report_num_records(report), "record index out of range");
    *out = to_c(report->report.records[index]);
  });
}

const char* so_report_termination(const so_report* report) {
  return report == nullptr ? "" : shapeopt::to_string(report->report.termination);
}

int so_report_num_messages(const so_report* report) {
  return report == nullptr ? 0 : static_cast<int>(report->report.messages.size());
}

const char* so_report_message(const so_report* report, int index) {
  if (report == nullptr || index < 0 || index >= so_report_num_messages(report)) return "";
  return report->report.messages[index].c_str();
}

so_status so_report_write_csv(const so_report* report, const char* path) {
  return guarded([&] {
    require(report != nullptr && path != nullptr, "null pointer argument");
    std::ofstream out(path);
    if (!out) throw shapeopt::IoError(std::string("cannot open '") + path + "' for writing");
    shapeopt::io::write_report_csv(out, report->report);
    if (!out) throw shapeopt::IoError(std::string("write to '") + path + "' failed");
  });
}

void so_report_free(so_report* report) { delete report; }

so_status so_analytic_check(so_check_result* results, int capacity, int* count) {
  return guarded([&] {
    require(count != nullptr, "null pointer argument");
    require(capacity >= 0 && (capacity == 0 || results != nullptr), "invalid result buffer");
    const auto checks = shapeopt::analytic_check();
    *count = static_cast<int>(checks.size());
    for (int i = 0; i < capacity && i < *count; ++i) {
      so_check_result& r = results[i];
      std::memset(r.name, 0, sizeof r.name);
      std::strncpy(r.name, checks[i].name.c_str(), sizeof r.name - 1);
      r.value = checks[i].value;
      r.expected = checks[i].expected;
      r.tolerance = checks[i].tolerance;
      r.pass = checks[i].pass ? 1 : 0;
    }
  });
}

}  // extern "C"
