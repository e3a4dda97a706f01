#ifndef SBPEMBED_H
#define SBPEMBED_H

#include <stddef.h>

#if defined(SBPE_BUILDING_LIBRARY)
#define SBPE_API __attribute__((visibility("default")))
#else
#define SBPE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sbpe_status {
  SBPE_OK = 0,
  SBPE_CHECK_FAILED = 1, /* a verification or convergence check did not pass */
  SBPE_ERR_INVALID_ARGUMENT = 2,
  SBPE_ERR_CONFIG = 3,
  SBPE_ERR_MESH = 4, /* schema, mapping or connectivity problem */
  SBPE_ERR_UNSUPPORTED = 5,
  SBPE_ERR_DIVERGENCE = 6,
  SBPE_ERR_DOMAIN = 7,
  SBPE_ERR_IO = 8,
  SBPE_ERR_INTERNAL = 9
} sbpe_status;

/* Message of the last failed call on this thread, "" if none. */
SBPE_API const char* sbpe_last_error(void);
SBPE_API const char* sbpe_status_name(sbpe_status status);
SBPE_API const char* sbpe_version(void);

/* Caps the threads used inside library calls made from this thread; 0 restores the default. */
SBPE_API sbpe_status sbpe_set_threads(int threads);
SBPE_API int sbpe_max_threads(void);

/* Meshes */
typedef struct sbpe_mesh sbpe_mesh;

SBPE_API sbpe_status sbpe_mesh_load(const char* path, sbpe_mesh** out);
/* Parses without geometric validation; call sbpe_mesh_validate. */
SBPE_API sbpe_status sbpe_mesh_from_json(const char* text, sbpe_mesh** out);
SBPE_API sbpe_status sbpe_mesh_circle(int refinement, const char* tag, double half_width, sbpe_mesh** out);
SBPE_API sbpe_status sbpe_mesh_rectangle(int nx, int ny, double x0, double y0, double x1, double y1, const char* tag,
                                         sbpe_mesh** out);
SBPE_API sbpe_status sbpe_mesh_save(const sbpe_mesh* mesh, const char* path);
/* Calls `on_violation` once per violation; SBPE_ERR_MESH when any were found. */
SBPE_API sbpe_status sbpe_mesh_validate(const sbpe_mesh* mesh, void (*on_violation)(const char* message, void* user),
                                        void* user, int* n_violations);
SBPE_API sbpe_status sbpe_mesh_counts(const sbpe_mesh* mesh, int* n_blocks, int* n_interfaces, int* n_boundary_sides);
SBPE_API void sbpe_mesh_free(sbpe_mesh* mesh);

/* Assembled operators of one mesh at one order */
typedef struct sbpe_discretization sbpe_discretization;

SBPE_API sbpe_status sbpe_discretize(const sbpe_mesh* mesh, int p, sbpe_discretization** out);
/* n nodes per block direction, N non-reduced points, N_hat unique points. */
SBPE_API sbpe_status sbpe_disc_sizes(const sbpe_discretization* disc, int* n, int* N, int* N_hat);
/* Unique grid points as x0,y0,x1,y1,...; `capacity` counts doubles. */
SBPE_API sbpe_status sbpe_disc_points(const sbpe_discretization* disc, double* xy, size_t capacity);
/* Reduced quadrature weights, N_hat entries. */
SBPE_API sbpe_status sbpe_disc_weights(const sbpe_discretization* disc, double* h, size_t capacity);
/* Largest relative residual of the global Green identity over random pairs. */
SBPE_API sbpe_status sbpe_disc_green_residual(const sbpe_discretization* disc, int pairs, unsigned seed,
                                              double* residual);
/* Writes E.coo, H.coo and D_L.coo ("row col value" lines) into `dir`. */
SBPE_API sbpe_status sbpe_disc_dump(const sbpe_discretization* disc, const char* dir);
SBPE_API void sbpe_disc_free(sbpe_discretization* disc);

/* Operator verification suite */
typedef struct sbpe_check {
  const char* name;
  double value;
  double threshold;
  int passed;
  const char* detail; /* "" unless the check could not be evaluated */
} sbpe_check;

#define SBPE_VERIFY_PERTURB_WEIGHT 1u /* test hook: corrupts one quadrature weight */

/* SBPE_CHECK_FAILED when any check fails. */
SBPE_API sbpe_status sbpe_verify(const int* orders, int count, unsigned flags,
                                 void (*on_check)(const sbpe_check* check, void* user), void* user);

/* Circle convergence study with the point source at the origin */
typedef struct sbpe_converge_options {
  int p;
  int first_level;
  int levels;
  double c;
  double sigma;
  double t_source;
  double t_end;
  double cfl_fraction;
} sbpe_converge_options;

typedef struct sbpe_converge_row {
  int p;
  int refinement;
  int n_blocks;
  int n_dofs;
  double l2_error;
  double log10_error;
  double rate; /* NaN on the first row */
  long steps;
  double dt;
  double stepping_seconds;
  int failed;
  const char* failure;
} sbpe_converge_row;

SBPE_API void sbpe_converge_defaults(sbpe_converge_options* options);
/* Writes the CSV when `csv_path` is non-null. SBPE_CHECK_FAILED when a level diverged. */
SBPE_API sbpe_status sbpe_converge(const sbpe_converge_options* options, const char* csv_path,
                                   void (*on_row)(const sbpe_converge_row* row, void* user), void* user);

/* Simulation from files; `on_report` receives the JSON report (also on divergence). */
SBPE_API sbpe_status sbpe_run(const char* mesh_path, const char* config_path, const char* out_dir,
                              void (*on_report)(const char* json, void* user), void* user);

/* Step-by-step solver */
typedef struct sbpe_solver sbpe_solver;

typedef struct sbpe_solver_info {
  int size;
  long steps_taken;
  double t;
  double dt;
  double energy;
} sbpe_solver_info;

/* `config_json` uses the run-config keys; `p` there is ignored in favour of the discretization. */
SBPE_API sbpe_status sbpe_solver_create(const sbpe_discretization* disc, const char* config_json, sbpe_solver** out);
/* Sets v and v_t (N_hat entries each; null means zero) and resets time to t. */
SBPE_API sbpe_status sbpe_solver_set_state(sbpe_solver* solver, const double* v, const double* v_t, double t);
SBPE_API sbpe_status sbpe_solver_step(sbpe_solver* solver, long steps);
SBPE_API sbpe_status sbpe_solver_info_get(const sbpe_solver* solver, sbpe_solver_info* info);
SBPE_API sbpe_status sbpe_solver_solution(const sbpe_solver* solver, double* v, size_t capacity);
SBPE_API void sbpe_solver_free(sbpe_solver* solver);

#ifdef __cplusplus
}
#endif

#endif
