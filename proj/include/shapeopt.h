/* C interface to the shapeopt library. All functions are safe to call from
 * C; errors are reported as status codes with a message in so_last_error(). */
#ifndef SHAPEOPT_H
#define SHAPEOPT_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SO_API __declspec(dllexport)
#else
#define SO_API __attribute__((visibility("default")))
#endif

typedef enum so_status {
  SO_OK = 0,
  SO_ERR_PARAM = 1,      /* invalid argument or configuration */
  SO_ERR_SOLVER = 2,     /* linear or nonlinear solver failed its contract */
  SO_ERR_IO = 3,         /* file could not be read or written */
  SO_ERR_DEGENERATE = 4, /* mesh inverted or below the angle floor */
  SO_ERR_INTERNAL = 5
} so_status;

typedef struct so_mesh so_mesh;
typedef struct so_report so_report;

/* Message of the most recent failure on this thread ("" if none). */
SO_API const char* so_last_error(void);
SO_API const char* so_version(void);

/* Meshes. Every created mesh must be released with so_mesh_free. */
SO_API so_status so_mesh_regular_polygon(int n_sides, double area, so_mesh** out);
SO_API so_status so_mesh_disk(double radius, int level, so_mesh** out);
SO_API so_status so_mesh_refine(const so_mesh* mesh, so_mesh** out);
SO_API so_status so_mesh_read(const char* path, so_mesh** out);
SO_API so_status so_mesh_write(const so_mesh* mesh, const char* path);
SO_API void so_mesh_free(so_mesh* mesh);

typedef struct so_mesh_info {
  int num_vertices;
  int num_triangles;
  int num_edges;
  int num_boundary_edges;
  double area;
  double min_angle; /* radians */
  double barycenter_x;
  double barycenter_y;
} so_mesh_info;

SO_API so_status so_mesh_get_info(const so_mesh* mesh, so_mesh_info* info);
SO_API so_status so_mesh_vertex(const so_mesh* mesh, int vertex, double* x, double* y);
/* Interior angle of the domain at a boundary vertex, radians. */
SO_API so_status so_mesh_corner_angle(const so_mesh* mesh, int vertex, double* angle);

/* Problem names: example1 (alias polygon), gingerbread, kidney. */
typedef struct so_stationarity_result {
  double eta;
  double J;
  int lms_iterations;
  int lms_converged;
  double kkt_residual;
  double divergence_residual;
  double boundary_residual;
} so_stationarity_result;

SO_API so_status so_stationarity(const so_mesh* mesh, const char* problem, double p,
                                 so_stationarity_result* out);

typedef struct so_optimizer_config {
  double p;
  int max_outer_iters;
  int k_min;
  int k_max;
  double eta_rel_stop;
  double eta_small_rel;
  double translation_tol;
  double min_angle_floor_deg;
  int enable_translation_step;
} so_optimizer_config;

SO_API void so_optimizer_config_default(so_optimizer_config* config);

typedef struct so_iteration_record {
  int iter;
  double J;
  double eta;
  double alpha;
  double min_angle; /* radians */
  double barycenter_x;
  double barycenter_y;
} so_iteration_record;

typedef void (*so_iteration_callback)(const so_iteration_record* record, void* user);

/* Runs the shape gradient iteration. On SO_OK, *report and *final_mesh are
 * owned by the caller. callback may be NULL. */
SO_API so_status so_optimize(const so_mesh* initial, const char* problem,
                             const so_optimizer_config* config, so_iteration_callback callback,
                             void* user, so_report** report, so_mesh** final_mesh);

SO_API int so_report_num_records(const so_report* report);
SO_API so_status so_report_record(const so_report* report, int index, so_iteration_record* out);
/* "converged", "degenerate_mesh", "max_iters" or "line_search_failed". */
SO_API const char* so_report_termination(const so_report* report);
SO_API int so_report_num_messages(const so_report* report);
SO_API const char* so_report_message(const so_report* report, int index);
SO_API so_status so_report_write_csv(const so_report* report, const char* path);
SO_API void so_report_free(so_report* report);

typedef struct so_check_result {
  char name[96];
  double value;
  double expected;
  double tolerance;
  int pass;
} so_check_result;

/* Fills up to capacity results; *count receives the total number of checks.
 * Returns SO_OK even when checks fail; inspect the pass fields. */
SO_API so_status so_analytic_check(so_check_result* results, int capacity, int* count);

#ifdef __cplusplus
}
#endif

#endif
