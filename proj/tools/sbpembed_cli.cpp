// Command-line front end. Links only the C API.
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sbpembed/sbpembed.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

int exit_code(sbpe_status s) {
  switch (s) {
    case SBPE_OK: return kExitOk;
    case SBPE_CHECK_FAILED:
    case SBPE_ERR_DIVERGENCE:
    case SBPE_ERR_INTERNAL: return kExitCheckFailed;
    default: return kExitUsage;
  }
}

int report_failure(const char* what, sbpe_status s) {
  std::fprintf(stderr, "sbpembed %s: %s: %s\n", what, sbpe_status_name(s), sbpe_last_error());
  return exit_code(s);
}

struct VerifyArgs {
  std::vector<int> orders{5, 7, 9};
  bool perturb = false;
};

int cmd_verify(const VerifyArgs& a) {
  if (a.orders.empty()) {
    std::fprintf(stderr, "sbpembed verify: --p needs at least one order\n");
    return kExitUsage;
  }
  int failed = 0, total = 0;
  auto line = [](const sbpe_check* c, void* user) {
    auto* counts = static_cast<std::pair<int*, int*>*>(user);
    ++*counts->second;
    if (!c->passed) ++*counts->first;
    std::printf("%-4s %-42s %.3e  (<= %.1e)\n", c->passed ? "ok" : "FAIL", c->name, c->value, c->threshold);
    if (c->detail[0] != '\0') std::printf("     %s\n", c->detail);
    std::fflush(stdout);
  };
  std::pair<int*, int*> counts{&failed, &total};
  const sbpe_status s = sbpe_verify(a.orders.data(), static_cast<int>(a.orders.size()),
                                    a.perturb ? SBPE_VERIFY_PERTURB_WEIGHT : 0u, line, &counts);
  if (s != SBPE_OK && s != SBPE_CHECK_FAILED) return report_failure("verify", s);
  std::printf("%d of %d checks passed\n", total - failed, total);
  return exit_code(s);
}

struct ConvergeArgs {
  sbpe_converge_options options{};
  std::string out = "convergence.csv";
  bool check = false;
};

int cmd_converge(const ConvergeArgs& a) {
  std::vector<sbpe_converge_row> rows;
  auto line = [](const sbpe_converge_row* r, void* user) {
    static_cast<std::vector<sbpe_converge_row>*>(user)->push_back(*r);
    if (r->failed) {
      std::printf("level %d  N_dofs %d  FAILED: %s\n", r->refinement, r->n_dofs, r->failure);
    } else {
      std::printf("level %d  blocks %d  N_dofs %d  steps %ld  l2 %.6e  log10 %.4f  q %.3f  (%.1f s)\n",
                  r->refinement, r->n_blocks, r->n_dofs, r->steps, r->l2_error, r->log10_error, r->rate,
                  r->stepping_seconds);
    }
    std::fflush(stdout);
  };
  const sbpe_status s = sbpe_converge(&a.options, a.out.c_str(), line, &rows);
  if (s != SBPE_OK) return report_failure("converge", s);
  std::printf("wrote %s\n", a.out.c_str());
  if (!a.check) return kExitOk;

  bool ok = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].l2_error < rows[i - 1].l2_error)) {
      std::printf("FAIL errors not strictly decreasing at level %d\n", rows[i].refinement);
      ok = false;
    }
  const double q = rows.back().rate;
  if (!(q >= a.options.p)) {
    std::printf("FAIL finest-pair rate %.3f below %d\n", q, a.options.p);
    ok = false;
  }
  return ok ? kExitOk : kExitCheckFailed;
}

struct RunArgs {
  std::string mesh, config, out = "run_output";
};

int cmd_run(const RunArgs& a) {
  auto print = [](const char* json, void*) { std::printf("%s\n", json); };
  const sbpe_status s = sbpe_run(a.mesh.c_str(), a.config.c_str(), a.out.c_str(), print, nullptr);
  if (s != SBPE_OK) return report_failure("run", s);
  return kExitOk;
}

struct MeshInfoArgs {
  std::string path;
  int circle = -1;
  std::vector<int> rectangle;
  int p = 0;
  std::string dump, save;
};

int cmd_mesh_info(const MeshInfoArgs& a) {
  const int sources = !a.path.empty() + (a.circle >= 0) + !a.rectangle.empty();
  if (sources != 1) {
    std::fprintf(stderr, "sbpembed mesh-info: give exactly one of MESH, --circle or --rectangle\n");
    return kExitUsage;
  }
  sbpe_mesh* mesh = nullptr;
  sbpe_status s;
  if (!a.path.empty()) {
    std::ifstream in(a.path);
    if (!in) {
      std::fprintf(stderr, "sbpembed mesh-info: cannot open %s\n", a.path.c_str());
      return kExitUsage;
    }
    std::stringstream text;
    text << in.rdbuf();
    s = sbpe_mesh_from_json(text.str().c_str(), &mesh);
  } else if (a.circle >= 0) {
    s = sbpe_mesh_circle(a.circle, "dirichlet", 0.5, &mesh);
  } else {
    if (a.rectangle.size() != 2) {
      std::fprintf(stderr, "sbpembed mesh-info: --rectangle takes NX,NY\n");
      return kExitUsage;
    }
    s = sbpe_mesh_rectangle(a.rectangle[0], a.rectangle[1], 0.0, 0.0, 1.0, 1.0, "dirichlet", &mesh);
  }
  if (s != SBPE_OK) return report_failure("mesh-info", s);
  std::unique_ptr<sbpe_mesh, decltype(&sbpe_mesh_free)> guard(mesh, sbpe_mesh_free);

  int blocks = 0, interfaces = 0, boundary = 0;
  sbpe_mesh_counts(mesh, &blocks, &interfaces, &boundary);
  std::printf("blocks %d\ninterfaces %d\nboundary_sides %d\n", blocks, interfaces, boundary);

  auto violation = [](const char* msg, void*) { std::printf("violation: %s\n", msg); };
  int n_violations = 0;
  s = sbpe_mesh_validate(mesh, violation, nullptr, &n_violations);
  std::printf("valid %s\n", n_violations == 0 ? "yes" : "no");
  if (s != SBPE_OK) return kExitUsage;

  if (!a.save.empty()) {
    s = sbpe_mesh_save(mesh, a.save.c_str());
    if (s != SBPE_OK) return report_failure("mesh-info", s);
    std::printf("saved %s\n", a.save.c_str());
  }
  if (a.p == 0) {
    if (!a.dump.empty()) {
      std::fprintf(stderr, "sbpembed mesh-info: --dump needs --p\n");
      return kExitUsage;
    }
    return kExitOk;
  }

  sbpe_discretization* disc = nullptr;
  s = sbpe_discretize(mesh, a.p, &disc);
  if (s != SBPE_OK) return report_failure("mesh-info", s);
  std::unique_ptr<sbpe_discretization, decltype(&sbpe_disc_free)> disc_guard(disc, sbpe_disc_free);
  int n = 0, N = 0, N_hat = 0;
  sbpe_disc_sizes(disc, &n, &N, &N_hat);
  std::vector<double> h(static_cast<std::size_t>(N_hat));
  sbpe_disc_weights(disc, h.data(), h.size());
  double area = 0.0;
  for (double w : h) area += w;
  double residual = 0.0;
  sbpe_disc_green_residual(disc, 10, 7u, &residual);
  std::printf("p %d\nnodes_per_direction %d\nN %d\nN_hat %d\narea %.12e\ngreen_residual %.3e\n", a.p, n, N, N_hat,
              area, residual);
  if (!a.dump.empty()) {
    s = sbpe_disc_dump(disc, a.dump.c_str());
    if (s != SBPE_OK) return report_failure("mesh-info", s);
    std::printf("dumped E.coo H.coo D_L.coo to %s\n", a.dump.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous SBP discretizations on curvilinear multiblock meshes"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Cap on library threads (0: default)")->check(CLI::NonNegativeNumber);

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Run the operator identity suite on built-in meshes");
  v->add_option("--p", verify.orders, "Orders to check, e.g. 5,7,9")->delimiter(',');
  v->add_flag("--inject-weight-perturbation", verify.perturb, "Test hook: corrupt one quadrature weight");

  ConvergeArgs converge;
  sbpe_converge_defaults(&converge.options);
  auto* c = app.add_subcommand("converge", "Point-source convergence study on the unit disc");
  c->add_option("--p", converge.options.p, "Operator order");
  c->add_option("--levels", converge.options.levels, "Number of refinement levels (>= 2)");
  c->add_option("--first-level", converge.options.first_level, "Coarsest refinement level");
  c->add_option("--out", converge.out, "CSV output path");
  c->add_option("--cfl-fraction", converge.options.cfl_fraction, "Fraction of the RK4 stability limit");
  c->add_flag("--check", converge.check, "Exit 1 unless errors decrease and the finest rate reaches p");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Time-step a simulation and write snapshots");
  r->add_option("mesh", run.mesh, "Mesh JSON file")->required();
  r->add_option("config", run.config, "Simulation config JSON file")->required();
  r->add_option("--out", run.out, "Output directory");

  MeshInfoArgs info;
  auto* m = app.add_subcommand("mesh-info", "Validate a mesh and report operator sizes");
  m->add_option("mesh", info.path, "Mesh JSON file");
  m->add_option("--circle", info.circle, "Use the built-in disc mesh at this refinement");
  m->add_option("--rectangle", info.rectangle, "Use a built-in NX,NY block unit square")->delimiter(',');
  m->add_option("--p", info.p, "Assemble operators of this order");
  m->add_option("--dump", info.dump, "Write COO operator dumps into this directory");
  m->add_option("--save", info.save, "Write the mesh as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (sbpe_set_threads(threads) != SBPE_OK) return report_failure("--threads", SBPE_ERR_INVALID_ARGUMENT);
  if (v->parsed()) return cmd_verify(verify);
  if (c->parsed()) return cmd_converge(converge);
  if (r->parsed()) return cmd_run(run);
  return cmd_mesh_info(info);
}
