/* Exercises the C interface from plain C. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "shapeopt.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static int callback_calls = 0;
static void on_record(const so_iteration_record* record, void* user) {
  (void)record;
  ++*(int*)user;
  ++callback_calls;
}

int main(void) {
  const double pi = 3.14159265358979323846;
  so_mesh* square = NULL;
  so_mesh* fine = NULL;
  so_mesh* disk = NULL;
  so_mesh* bad = (so_mesh*)0;
  so_mesh_info info;
  double angle = 0.0;
  double x = 0.0, y = 0.0;

  EXPECT(strlen(so_version()) > 0);

  EXPECT(so_mesh_regular_polygon(4, 2.0, &square) == SO_OK);
  EXPECT(so_mesh_get_info(square, &info) == SO_OK);
  EXPECT(info.num_triangles == 8);
  EXPECT(fabs(info.area - 2.0) < 1e-12);
  EXPECT(so_mesh_vertex(square, 1, &x, &y) == SO_OK);
  EXPECT(fabs(x - 1.0) < 1e-14 && fabs(y) < 1e-14);
  EXPECT(so_mesh_corner_angle(square, 1, &angle) == SO_OK);
  EXPECT(fabs(angle - pi / 2) < 1e-12);

  /* Error paths set a status and a message. */
  EXPECT(so_mesh_regular_polygon(2, 1.0, &bad) == SO_ERR_PARAM);
  EXPECT(bad == NULL);
  EXPECT(strlen(so_last_error()) > 0);
  EXPECT(so_mesh_corner_angle(square, 0, &angle) == SO_ERR_PARAM);
  EXPECT(so_mesh_vertex(square, 1000, &x, &y) == SO_ERR_PARAM);
  EXPECT(so_mesh_read("/nonexistent/file.mesh", &bad) == SO_ERR_IO);
  EXPECT(so_mesh_get_info(NULL, &info) == SO_ERR_PARAM);

  /* Stationarity on the optimal disk: small indicator. */
  EXPECT(so_mesh_disk(sqrt(2.0), 3, &disk) == SO_OK);
  {
    so_stationarity_result st;
    EXPECT(so_stationarity(disk, "example1", 1.5, &st) == SO_OK);
    EXPECT(st.eta < 0.05);
    EXPECT(fabs(st.J + pi / 16) < 1e-2);
    EXPECT(st.kkt_residual < 1e-10);
    EXPECT(so_stationarity(disk, "no-such-problem", 2.0, &st) == SO_ERR_PARAM);
    EXPECT(so_stationarity(disk, "example1", 3.0, &st) == SO_ERR_PARAM);
  }

  /* Short optimization with a progress callback. */
  EXPECT(so_mesh_refine(square, &fine) == SO_OK);
  {
    so_optimizer_config cfg;
    so_report* report = NULL;
    so_mesh* final_mesh = NULL;
    so_iteration_record rec;
    int user_count = 0;
    so_optimizer_config_default(&cfg);
    EXPECT(cfg.p == 2.0);
    cfg.p = 1.1;
    cfg.max_outer_iters = 3;
    EXPECT(so_optimize(fine, "polygon", &cfg, on_record, &user_count, &report, &final_mesh) == SO_OK);
    EXPECT(report != NULL && final_mesh != NULL);
    EXPECT(so_report_num_records(report) >= 2);
    EXPECT(user_count == so_report_num_records(report));
    EXPECT(callback_calls == user_count);
    EXPECT(so_report_record(report, 0, &rec) == SO_OK);
    EXPECT(rec.iter == 0);
    EXPECT(so_report_record(report, so_report_num_records(report) - 1, &rec) == SO_OK);
    EXPECT(rec.alpha == 0.0);
    EXPECT(so_report_record(report, -1, &rec) == SO_ERR_PARAM);
    EXPECT(strlen(so_report_termination(report)) > 0);
    EXPECT(so_report_write_csv(report, "/nonexistent/dir/out.csv") == SO_ERR_IO);
    so_report_free(report);
    so_mesh_free(final_mesh);

    cfg.p = 0.5;
    report = NULL;
    EXPECT(so_optimize(fine, "polygon", &cfg, NULL, NULL, &report, &final_mesh) == SO_ERR_PARAM);
    EXPECT(report == NULL);
  }

  {
    so_check_result results[64];
    int count = 0;
    int i;
    EXPECT(so_analytic_check(results, 64, &count) == SO_OK);
    EXPECT(count > 0 && count <= 64);
    for (i = 0; i < count && i < 64; ++i) EXPECT(results[i].pass);
  }

  so_mesh_free(square);
  so_mesh_free(fine);
  so_mesh_free(disk);
  so_mesh_free(NULL);

  if (failures) {
    fprintf(stderr, "%d failures\n", failures);
    return 1;
  }
  printf("capi ok\n");
  return 0;
}
