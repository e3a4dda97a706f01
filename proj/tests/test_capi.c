/* Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "sbpembed/sbpembed.h"

static int failures = 0;

#define EXPECT(cond)                                                \
  do {                                                              \
    if (!(cond)) {                                                  \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                   \
    }                                                               \
  } while (0)

static void count_check(const sbpe_check* c, void* user) {
  int* counts = (int*)user;
  counts[0] += 1;
  counts[1] += c->passed ? 0 : 1;
}

static void count_row(const sbpe_converge_row* r, void* user) {
  (void)r;
  *(int*)user += 1;
}

static void count_violation(const char* msg, void* user) {
  (void)msg;
  *(int*)user += 1;
}

int main(void) {
  EXPECT(strlen(sbpe_version()) > 0);
  EXPECT(sbpe_set_threads(1) == SBPE_OK);
  EXPECT(sbpe_set_threads(-1) == SBPE_ERR_INVALID_ARGUMENT);
  EXPECT(strlen(sbpe_last_error()) > 0);
  EXPECT(sbpe_set_threads(0) == SBPE_OK);

  /* verify */
  int orders[] = {5, 7};
  int counts[2] = {0, 0};
  EXPECT(sbpe_verify(orders, 2, 0u, count_check, counts) == SBPE_OK);
  EXPECT(counts[0] > 0 && counts[1] == 0);
  counts[0] = counts[1] = 0;
  EXPECT(sbpe_verify(orders, 1, SBPE_VERIFY_PERTURB_WEIGHT, count_check, counts) == SBPE_CHECK_FAILED);
  EXPECT(counts[1] > 0);
  EXPECT(sbpe_verify(orders, 0, 0u, NULL, NULL) == SBPE_ERR_INVALID_ARGUMENT);
  int bad_order = 0;
  EXPECT(sbpe_verify(&bad_order, 1, 0u, NULL, NULL) == SBPE_ERR_INVALID_ARGUMENT);

  /* meshes */
  sbpe_mesh* mesh = NULL;
  EXPECT(sbpe_mesh_circle(1, "rim", 0.5, &mesh) == SBPE_OK);
  int blocks = 0, faces = 0, sides = 0;
  EXPECT(sbpe_mesh_counts(mesh, &blocks, &faces, &sides) == SBPE_OK);
  EXPECT(blocks == 20 && sides == 8 && 2 * faces + sides == 80);
  int violations = -1;
  EXPECT(sbpe_mesh_validate(mesh, NULL, NULL, &violations) == SBPE_OK && violations == 0);
  EXPECT(sbpe_mesh_circle(1, "rim", 0.9, &mesh) == SBPE_ERR_INVALID_ARGUMENT);

  sbpe_mesh* broken = NULL;
  EXPECT(sbpe_mesh_from_json("{\"version\": 1, \"blocks\": [", &broken) == SBPE_ERR_MESH);
  EXPECT(sbpe_mesh_load("/nonexistent/mesh.json", &broken) == SBPE_ERR_IO);
  const char* shifted =
      "{\"version\":1,\"blocks\":["
      "{\"edges\":[{\"kind\":\"line\",\"from\":[0,0],\"to\":[1,0]},{\"kind\":\"line\",\"from\":[1,0],\"to\":[1,1]},"
      "{\"kind\":\"line\",\"from\":[0,1],\"to\":[1,1]},{\"kind\":\"line\",\"from\":[0,0],\"to\":[0,1]}]},"
      "{\"edges\":[{\"kind\":\"line\",\"from\":[1,0.3],\"to\":[2,0.3]},{\"kind\":\"line\",\"from\":[2,0.3],\"to\":[2,1.3]},"
      "{\"kind\":\"line\",\"from\":[1,1.3],\"to\":[2,1.3]},{\"kind\":\"line\",\"from\":[1,0.3],\"to\":[1,1.3]}]}],"
      "\"interfaces\":[{\"a\":[0,\"e\"],\"b\":[1,\"w\"]}],"
      "\"boundaries\":[{\"block\":0,\"side\":\"s\",\"tag\":\"w\"},{\"block\":0,\"side\":\"n\",\"tag\":\"w\"},"
      "{\"block\":0,\"side\":\"w\",\"tag\":\"w\"},{\"block\":1,\"side\":\"s\",\"tag\":\"w\"},"
      "{\"block\":1,\"side\":\"e\",\"tag\":\"w\"},{\"block\":1,\"side\":\"n\",\"tag\":\"w\"}]}";
  EXPECT(sbpe_mesh_from_json(shifted, &broken) == SBPE_OK);
  int nv = 0;
  EXPECT(sbpe_mesh_validate(broken, count_violation, &nv, NULL) == SBPE_ERR_MESH);
  EXPECT(nv > 0);
  sbpe_discretization* bad_disc = NULL;
  EXPECT(sbpe_discretize(broken, 3, &bad_disc) == SBPE_ERR_MESH);
  sbpe_mesh_free(broken);

  /* discretization */
  sbpe_discretization* disc = NULL;
  EXPECT(sbpe_discretize(mesh, 5, &disc) == SBPE_OK);
  EXPECT(sbpe_discretize(mesh, 99, &bad_disc) == SBPE_ERR_INVALID_ARGUMENT);
  int n = 0, N = 0, N_hat = 0;
  EXPECT(sbpe_disc_sizes(disc, &n, &N, &N_hat) == SBPE_OK);
  EXPECT(n == 6 && N == 20 * 36 && N_hat == 521);
  double* h = malloc(sizeof(double) * (size_t)N_hat);
  EXPECT(sbpe_disc_weights(disc, h, (size_t)N_hat) == SBPE_OK);
  double area = 0.0;
  for (int i = 0; i < N_hat; ++i) area += h[i];
  EXPECT(fabs(area - 3.14159265358979) < 1e-4);
  EXPECT(sbpe_disc_weights(disc, h, 3) == SBPE_ERR_INVALID_ARGUMENT);
  free(h);
  double residual = 1.0;
  EXPECT(sbpe_disc_green_residual(disc, 5, 1u, &residual) == SBPE_OK);
  EXPECT(residual < 1e-10);

  /* solver: Neumann rim, no source, initial bump, energy conserved */
  sbpe_solver* solver = NULL;
  EXPECT(sbpe_solver_create(disc, "{\"boundary\": {\"rim\": \"neumann\"}}", &solver) == SBPE_OK);
  double* xy = malloc(sizeof(double) * 2 * (size_t)N_hat);
  double* v = malloc(sizeof(double) * (size_t)N_hat);
  EXPECT(sbpe_disc_points(disc, xy, 2 * (size_t)N_hat) == SBPE_OK);
  for (int i = 0; i < N_hat; ++i) {
    const double dx = xy[2 * i] - 0.1, dy = xy[2 * i + 1];
    v[i] = exp(-(dx * dx + dy * dy) / 0.045);
  }
  EXPECT(sbpe_solver_set_state(solver, v, NULL, 0.0) == SBPE_OK);
  sbpe_solver_info info;
  EXPECT(sbpe_solver_info_get(solver, &info) == SBPE_OK);
  const double e0 = info.energy;
  EXPECT(e0 > 0.0 && info.size == N_hat);
  EXPECT(sbpe_solver_step(solver, 200) == SBPE_OK);
  EXPECT(sbpe_solver_info_get(solver, &info) == SBPE_OK);
  EXPECT(info.steps_taken == 200);
  EXPECT(fabs(info.energy - e0) <= 1e-6 * e0);
  EXPECT(fabs(info.t - 200 * info.dt) < 1e-12);
  EXPECT(sbpe_solver_solution(solver, v, (size_t)N_hat) == SBPE_OK);
  EXPECT(sbpe_solver_step(solver, -1) == SBPE_ERR_INVALID_ARGUMENT);
  sbpe_solver_free(solver);
  EXPECT(sbpe_solver_create(disc, "{\"boundary\": {\"rim\": \"robin\"}}", &solver) == SBPE_ERR_CONFIG);
  EXPECT(sbpe_solver_create(disc, "{}", &solver) == SBPE_ERR_CONFIG); /* tag "rim" unmapped */
  EXPECT(sbpe_solver_create(disc, "{\"source_xy\": [0.0123, 0], \"boundary\": {\"rim\": \"dirichlet\"}}", &solver) ==
         SBPE_ERR_CONFIG);
  free(xy);
  free(v);
  sbpe_disc_free(disc);
  sbpe_mesh_free(mesh);

  /* convergence */
  sbpe_converge_options opt;
  sbpe_converge_defaults(&opt);
  EXPECT(opt.p == 5 && opt.sigma == 0.04 && opt.t_end == 0.8);
  opt.p = 4;
  opt.first_level = 0;
  opt.levels = 2;
  int rows = 0;
  EXPECT(sbpe_converge(&opt, NULL, count_row, &rows) == SBPE_OK);
  EXPECT(rows == 2);
  opt.levels = 1;
  EXPECT(sbpe_converge(&opt, NULL, NULL, NULL) == SBPE_ERR_INVALID_ARGUMENT);

  EXPECT(sbpe_run("/nonexistent/mesh.json", "/nonexistent/config.json", "/tmp/x", NULL, NULL) == SBPE_ERR_IO);
  EXPECT(strcmp(sbpe_status_name(SBPE_ERR_DIVERGENCE), "divergence") == 0);

  if (failures) fprintf(stderr, "%d failures\n", failures);
  else printf("C API checks passed\n");
  return failures ? 1 : 0;
}
