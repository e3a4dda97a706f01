#include "sbpembed/sbpembed.h"

#include <Eigen/Core>
#include <cmath>
#include <exception>
#include <memory>
#include <new>
#include <random>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sbpembed/assembly.hpp"
#include "sbpembed/error.hpp"
#include "sbpembed/experiments.hpp"
#include "sbpembed/mesh.hpp"
#include "sbpembed/wave.hpp"

using namespace sbpembed;

struct sbpe_mesh {
  MultiblockMesh mesh;
};

struct sbpe_discretization {
  int p = 0;
  GlobalOperators ops;
};

struct sbpe_solver {
  SemiDiscreteSystem system;
  WaveState state;
  double dt = 0.0;
  long steps_taken = 0;
  std::unique_ptr<Rk4Integrator> rk;
};

namespace {

thread_local std::string last_error;

sbpe_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return SBPE_ERR_INVALID_ARGUMENT;
    case ErrorCode::Configuration: return SBPE_ERR_CONFIG;
    case ErrorCode::InvalidMesh:
    case ErrorCode::InvalidMapping:
    case ErrorCode::InconsistentMesh: return SBPE_ERR_MESH;
    case ErrorCode::Unsupported: return SBPE_ERR_UNSUPPORTED;
    case ErrorCode::Divergence: return SBPE_ERR_DIVERGENCE;
    case ErrorCode::Domain: return SBPE_ERR_DOMAIN;
    case ErrorCode::Io: return SBPE_ERR_IO;
    case ErrorCode::Internal: return SBPE_ERR_INTERNAL;
  }
  return SBPE_ERR_INTERNAL;
}

template <class F>
sbpe_status guarded(F&& body) {
  last_error.clear();
  try {
    return body();
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown exception";
  }
  return SBPE_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::InvalidArgument, what);
}

void check_order(int p) {
  if (p < 1 || p > 15) fail(ErrorCode::InvalidArgument, "unsupported order p = " + std::to_string(p) + " (1..15)");
}

}  // namespace

extern "C" {

const char* sbpe_last_error(void) { return last_error.c_str(); }

const char* sbpe_status_name(sbpe_status status) {
  switch (status) {
    case SBPE_OK: return "ok";
    case SBPE_CHECK_FAILED: return "check failed";
    case SBPE_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SBPE_ERR_CONFIG: return "configuration error";
    case SBPE_ERR_MESH: return "mesh error";
    case SBPE_ERR_UNSUPPORTED: return "unsupported";
    case SBPE_ERR_DIVERGENCE: return "divergence";
    case SBPE_ERR_DOMAIN: return "domain error";
    case SBPE_ERR_IO: return "i/o error";
    case SBPE_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sbpe_version(void) { return "0.1.0"; }

sbpe_status sbpe_set_threads(int threads) {
  return guarded([&] {
    require(threads >= 0, "thread count must be >= 0");
#ifdef _OPENMP
    static const int default_threads = omp_get_max_threads();
    const int t = threads == 0 ? default_threads : threads;
    omp_set_num_threads(t);
    Eigen::setNbThreads(t);
#endif
    return SBPE_OK;
  });
}

int sbpe_max_threads(void) {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

sbpe_status sbpe_mesh_load(const char* path, sbpe_mesh** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new sbpe_mesh{load_mesh(path)};
    return SBPE_OK;
  });
}

sbpe_status sbpe_mesh_from_json(const char* text, sbpe_mesh** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = new sbpe_mesh{parse_mesh(text)};
    return SBPE_OK;
  });
}

sbpe_status sbpe_mesh_circle(int refinement, const char* tag, double half_width, sbpe_mesh** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    require(refinement >= 0 && refinement <= 8, "circle refinement must lie in 0..8");
    require(half_width > 0.0 && half_width < 1.0 / std::sqrt(2.0), "half_width must lie in (0, 1/sqrt(2))");
    *out = new sbpe_mesh{generate_circle_mesh(refinement, tag ? tag : "dirichlet", half_width)};
    return SBPE_OK;
  });
}

sbpe_status sbpe_mesh_rectangle(int nx, int ny, double x0, double y0, double x1, double y1, const char* tag,
                                sbpe_mesh** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    require(nx >= 1 && ny >= 1 && x1 > x0 && y1 > y0, "rectangle needs nx, ny >= 1 and a positive extent");
    *out = new sbpe_mesh{generate_rectangle_mesh(nx, ny, {x0, y0}, {x1, y1}, tag ? tag : "dirichlet")};
    return SBPE_OK;
  });
}

sbpe_status sbpe_mesh_save(const sbpe_mesh* mesh, const char* path) {
  return guarded([&] {
    require(mesh && path, "null argument");
    save_mesh(mesh->mesh, path);
    return SBPE_OK;
  });
}

sbpe_status sbpe_mesh_validate(const sbpe_mesh* mesh, void (*on_violation)(const char*, void*), void* user,
                               int* n_violations) {
  return guarded([&] {
    require(mesh != nullptr, "null argument");
    const auto violations = validate_mesh(mesh->mesh);
    if (on_violation)
      for (const auto& v : violations) on_violation(v.c_str(), user);
    if (n_violations) *n_violations = static_cast<int>(violations.size());
    if (!violations.empty()) {
      last_error = violations.front();
      return SBPE_ERR_MESH;
    }
    return SBPE_OK;
  });
}

sbpe_status sbpe_mesh_counts(const sbpe_mesh* mesh, int* n_blocks, int* n_interfaces, int* n_boundary_sides) {
  return guarded([&] {
    require(mesh != nullptr, "null argument");
    if (n_blocks) *n_blocks = static_cast<int>(mesh->mesh.blocks.size());
    if (n_interfaces) *n_interfaces = static_cast<int>(mesh->mesh.interfaces.size());
    if (n_boundary_sides) *n_boundary_sides = static_cast<int>(mesh->mesh.boundary_tags.size());
    return SBPE_OK;
  });
}

void sbpe_mesh_free(sbpe_mesh* mesh) { delete mesh; }

sbpe_status sbpe_discretize(const sbpe_mesh* mesh, int p, sbpe_discretization** out) {
  return guarded([&] {
    require(mesh && out, "null argument");
    check_order(p);
    auto disc = std::make_unique<sbpe_discretization>();
    disc->p = p;
    disc->ops = assemble(mesh->mesh, make_sbp_operator(p));
    *out = disc.release();
    return SBPE_OK;
  });
}

sbpe_status sbpe_disc_sizes(const sbpe_discretization* disc, int* n, int* N, int* N_hat) {
  return guarded([&] {
    require(disc != nullptr, "null argument");
    if (n) *n = disc->ops.n;
    if (N) *N = disc->ops.N();
    if (N_hat) *N_hat = disc->ops.N_hat();
    return SBPE_OK;
  });
}

sbpe_status sbpe_disc_points(const sbpe_discretization* disc, double* xy, size_t capacity) {
  return guarded([&] {
    require(disc && xy, "null argument");
    const auto& pts = disc->ops.embedding.reduced_points;
    require(capacity >= 2 * pts.size(), "buffer too small for 2 * N_hat doubles");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      xy[2 * i] = pts[i].x;
      xy[2 * i + 1] = pts[i].y;
    }
    return SBPE_OK;
  });
}

sbpe_status sbpe_disc_weights(const sbpe_discretization* disc, double* h, size_t capacity) {
  return guarded([&] {
    require(disc && h, "null argument");
    const Vec& H = disc->ops.H_reduced;
    require(capacity >= static_cast<size_t>(H.size()), "buffer too small for N_hat doubles");
    for (Eigen::Index i = 0; i < H.size(); ++i) h[i] = H[i];
    return SBPE_OK;
  });
}

sbpe_status sbpe_disc_green_residual(const sbpe_discretization* disc, int pairs, unsigned seed, double* residual) {
  return guarded([&] {
    require(disc && residual, "null argument");
    require(pairs >= 1, "pairs must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = disc->ops.N_hat();
    Vec u(n), v(n);
    double worst = 0.0;
    for (int k = 0; k < pairs; ++k) {
      for (int i = 0; i < n; ++i) u[i] = dist(rng);
      for (int i = 0; i < n; ++i) v[i] = dist(rng);
      worst = std::max(worst, green_residual_global(disc->ops, u, v));
    }
    *residual = worst;
    return SBPE_OK;
  });
}

sbpe_status sbpe_disc_dump(const sbpe_discretization* disc, const char* dir) {
  return guarded([&] {
    require(disc && dir, "null argument");
    const std::filesystem::path base(dir);
    std::error_code ec;
    std::filesystem::create_directories(base, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + base.string() + ": " + ec.message());
    write_coo(base / "E.coo", disc->ops.E());
    write_coo(base / "H.coo", disc->ops.H_reduced);
    write_coo(base / "D_L.coo", disc->ops.D_L_reduced);
    return SBPE_OK;
  });
}

void sbpe_disc_free(sbpe_discretization* disc) { delete disc; }

sbpe_status sbpe_verify(const int* orders, int count, unsigned flags, void (*on_check)(const sbpe_check*, void*),
                        void* user) {
  return guarded([&] {
    require(count >= 1 && orders != nullptr, "verify needs at least one order");
    VerifyOptions options;
    options.orders.assign(orders, orders + count);
    for (int p : options.orders) check_order(p);
    options.perturb_weight = (flags & SBPE_VERIFY_PERTURB_WEIGHT) != 0;
    const auto results = run_verification(options, [&](const CheckResult& r) {
      if (!on_check) return;
      const sbpe_check c{r.name.c_str(), r.value, r.threshold, r.passed ? 1 : 0, r.detail.c_str()};
      on_check(&c, user);
    });
    for (const auto& r : results)
      if (!r.passed) {
        last_error = "check failed: " + r.name;
        return SBPE_CHECK_FAILED;
      }
    return SBPE_OK;
  });
}

void sbpe_converge_defaults(sbpe_converge_options* options) {
  if (!options) return;
  const CircleExperiment d;
  *options = sbpe_converge_options{d.p, 1, 3, d.c, d.sigma, d.t_source, d.t_end, d.cfl_fraction};
}

sbpe_status sbpe_converge(const sbpe_converge_options* options, const char* csv_path,
                          void (*on_row)(const sbpe_converge_row*, void*), void* user) {
  return guarded([&] {
    require(options != nullptr, "null argument");
    check_order(options->p);
    require(options->levels >= 2, "converge needs at least two levels");
    require(options->first_level >= 0 && options->first_level + options->levels <= 9,
            "refinement levels must lie in 0..8");
    require(options->c > 0 && options->sigma > 0 && options->t_end > 0, "c, sigma and t_end must be positive");
    require(options->cfl_fraction > 0 && options->cfl_fraction <= 10, "cfl_fraction must lie in (0, 10]");
    CircleExperiment base;
    base.p = options->p;
    base.c = options->c;
    base.sigma = options->sigma;
    base.t_source = options->t_source;
    base.t_end = options->t_end;
    base.cfl_fraction = options->cfl_fraction;
    const auto rows = run_convergence(base, options->first_level, options->levels, [&](const ConvergenceRow& r) {
      if (!on_row) return;
      const sbpe_converge_row c{r.p,    r.refinement,       r.n_blocks, r.n_dofs, r.l2_error,
                                r.log10_error, r.rate, r.steps, r.dt, r.stepping_seconds,
                                r.failed ? 1 : 0,   r.failure.c_str()};
      on_row(&c, user);
    });
    if (csv_path) write_convergence_csv(csv_path, rows);
    for (const auto& r : rows)
      if (r.failed) {
        last_error = "refinement " + std::to_string(r.refinement) + " failed: " + r.failure;
        return SBPE_CHECK_FAILED;
      }
    return SBPE_OK;
  });
}

sbpe_status sbpe_run(const char* mesh_path, const char* config_path, const char* out_dir,
                     void (*on_report)(const char*, void*), void* user) {
  return guarded([&] {
    require(mesh_path && config_path && out_dir, "null argument");
    const MultiblockMesh mesh = load_mesh(mesh_path);
    const RunConfig config = load_run_config(config_path);
    check_order(config.p);
    try {
      const RunReport report = run_simulation(mesh, config, out_dir);
      if (on_report) on_report(report.to_json().c_str(), user);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Divergence && on_report) {
        RunReport failed;
        failed.config = config;
        failed.status = "diverged";
        failed.message = e.what();
        on_report(failed.to_json().c_str(), user);
      }
      throw;
    }
    return SBPE_OK;
  });
}

sbpe_status sbpe_solver_create(const sbpe_discretization* disc, const char* config_json, sbpe_solver** out) {
  return guarded([&] {
    require(disc && out, "null argument");
    const RunConfig config = parse_run_config(config_json ? config_json : "{}");
    auto s = std::make_unique<sbpe_solver>();
    s->system = build_system(disc->ops, config.problem);
    s->dt = stable_dt(s->system, config.problem.cfl_fraction).dt;
    s->state = zero_state(s->system);
    s->rk = std::make_unique<Rk4Integrator>(s->system);
    *out = s.release();
    return SBPE_OK;
  });
}

sbpe_status sbpe_solver_set_state(sbpe_solver* solver, const double* v, const double* v_t, double t) {
  return guarded([&] {
    require(solver != nullptr, "null argument");
    const Eigen::Index n = solver->system.size();
    solver->state.v = v ? Vec(Eigen::Map<const Vec>(v, n)) : Vec(Vec::Zero(n));
    solver->state.v_t = v_t ? Vec(Eigen::Map<const Vec>(v_t, n)) : Vec(Vec::Zero(n));
    solver->state.t = t;
    solver->steps_taken = 0;
    return SBPE_OK;
  });
}

sbpe_status sbpe_solver_step(sbpe_solver* solver, long steps) {
  return guarded([&] {
    require(solver != nullptr, "null argument");
    require(steps >= 0, "steps must be >= 0");
    for (long k = 0; k < steps; ++k) {
      solver->rk->step(solver->state, solver->dt, solver->steps_taken + 1);
      ++solver->steps_taken;
    }
    return SBPE_OK;
  });
}

sbpe_status sbpe_solver_info_get(const sbpe_solver* solver, sbpe_solver_info* info) {
  return guarded([&] {
    require(solver && info, "null argument");
    info->size = solver->system.size();
    info->steps_taken = solver->steps_taken;
    info->t = solver->state.t;
    info->dt = solver->dt;
    info->energy = discrete_energy(solver->state, solver->system);
    return SBPE_OK;
  });
}

sbpe_status sbpe_solver_solution(const sbpe_solver* solver, double* v, size_t capacity) {
  return guarded([&] {
    require(solver && v, "null argument");
    const Vec& s = solver->state.v;
    require(capacity >= static_cast<size_t>(s.size()), "buffer too small for N_hat doubles");
    for (Eigen::Index i = 0; i < s.size(); ++i) v[i] = s[i];
    return SBPE_OK;
  });
}

void sbpe_solver_free(sbpe_solver* solver) { delete solver; }

}  // extern "C"
