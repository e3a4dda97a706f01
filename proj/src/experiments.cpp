#include "sbpembed/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <algorithm>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"
#include "sbpembed/analytic.hpp"
#include "sbpembed/assembly.hpp"
#include "sbpembed/error.hpp"
#include "sbpembed/geometry.hpp"

namespace sbpembed {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vec random_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

Block parallelogram_block() {
  // x = 2 xi + 0.5 eta, y = 0.25 xi + 1.5 eta
  const Point o{0.0, 0.0}, a{2.0, 0.25}, b{0.5, 1.5}, ab{2.5, 1.75};
  return Block{{CurvedEdge::line(o, a), CurvedEdge::line(a, ab), CurvedEdge::line(b, ab), CurvedEdge::line(o, b)}};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options,
                                          const std::function<void(const CheckResult&)>& on_check) {
  std::vector<CheckResult> results;
  auto record = [&](std::string name, double value, double threshold, std::string detail = {}) {
    CheckResult r{std::move(name), value, threshold, value <= threshold, std::move(detail)};
    if (on_check) on_check(r);
    results.push_back(std::move(r));
  };

  for (int p : options.orders) {
    if (p < 1) fail(ErrorCode::InvalidArgument, "verify: unsupported order p = " + std::to_string(p));
    SbpOperator1D op = make_sbp_operator(p);
    if (options.perturb_weight) op.weights[1] *= 1.0 + 1e-4;
    const std::string tag = "p=" + std::to_string(p) + " ";
    const int n = op.n;

    record(tag + "sbp_residual", sbp_residual(op), 1e-13 * n);

    double quad = 0.0;
    for (int k = 0; k <= 2 * n - 3; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += op.weights[i] * std::pow(op.nodes[i], k);
      quad = std::max(quad, std::abs(s - 1.0 / (k + 1)));
    }
    record(tag + "quadrature_exactness", quad, 1e-13);

    double diff = 0.0;
    for (int k = 0; k <= p; ++k) {
      Vec f(n), df(n);
      for (int i = 0; i < n; ++i) {
        f[i] = std::pow(op.nodes[i], k);
        df[i] = k == 0 ? 0.0 : k * std::pow(op.nodes[i], k - 1);
      }
      diff = std::max(diff, (op.D1 * f - df).cwiseAbs().maxCoeff());
    }
    record(tag + "differentiation_exactness", diff, 1e-12);

    std::mt19937_64 rng(options.seed + static_cast<unsigned>(p));
    const std::vector<std::pair<std::string, Block>> single = {
        {"identity", generate_rectangle_mesh(1, 1, {0, 0}, {1, 1}).blocks[0]},
        {"affine", generate_rectangle_mesh(1, 1, {0, 0}, {2, 3}).blocks[0]},
        {"parallelogram", parallelogram_block()},
        {"quarter_annulus", quarter_annulus_block()},
    };
    for (const auto& [name, block] : single) {
      const BlockOperators b = block_operators(op, block);
      double worst = 0.0;
      for (int k = 0; k < options.random_pairs; ++k) {
        const Vec u = random_vector(rng, n * n), v = random_vector(rng, n * n);
        worst = std::max(worst, green_residual_block(b, u, v));
      }
      record(tag + "green_block_" + name, worst, 1e-10);

      double normals = 0.0;
      for (const SideOperators& s : b.sides)
        normals = std::max(normals, (s.nx.cwiseAbs2() + s.ny.cwiseAbs2() - Vec::Ones(n)).cwiseAbs().maxCoeff());
      record(tag + "unit_normals_" + name, normals, 1e-12);
    }

    const std::vector<std::pair<std::string, MultiblockMesh>> multi = {
        {"two_block", generate_rectangle_mesh(2, 1, {0, 0}, {1, 1})},
        {"two_by_two", generate_rectangle_mesh(2, 2, {0, 0}, {1, 1})},
        {"circle_r1", generate_circle_mesh(1)},
    };
    for (const auto& [name, mesh] : multi) {
      GlobalOperators g;
      try {
        g = assemble(mesh, op);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Unsupported && e.code() != ErrorCode::InconsistentMesh) throw;
        // A broken operator can make interfaces non-conforming; that is a failed check, not a usage error.
        const double inf = std::numeric_limits<double>::infinity();
        record(tag + "green_global_" + name, inf, 1e-10, e.what());
        record(tag + "interface_quadrature_" + name, inf, 1e-12, e.what());
        continue;
      }
      double worst = 0.0;
      for (int k = 0; k < options.random_pairs; ++k) {
        const Vec u = random_vector(rng, g.N_hat()), v = random_vector(rng, g.N_hat());
        worst = std::max(worst, green_residual_global(g, u, v));
      }
      record(tag + "green_global_" + name, worst, 1e-10);

      double quad_gap = 0.0;
      for (const Interface& f : mesh.interfaces) {
        const Vec& ha = g.blocks[f.a.block].side(f.a.side).H;
        const Vec& hb = g.blocks[f.b.block].side(f.b.side).H;
        for (int k = 0; k < n; ++k) {
          const int kb = f.orientation == Orientation::Aligned ? k : n - 1 - k;
          quad_gap = std::max(quad_gap, std::abs(ha[k] - hb[kb]));
        }
      }
      record(tag + "interface_quadrature_" + name, quad_gap, 1e-12);
    }
  }
  return results;
}

ConvergenceRow run_circle_experiment(const CircleExperiment& ex) {
  ConvergenceRow row;
  row.p = ex.p;
  row.refinement = ex.refinement;
  row.rate = std::numeric_limits<double>::quiet_NaN();

  const auto t0 = Clock::now();
  const MultiblockMesh mesh = generate_circle_mesh(ex.refinement, ex.boundary, ex.half_width);
  const SbpOperator1D op = make_sbp_operator(ex.p);
  const GlobalOperators g = assemble(mesh, op);
  row.n_blocks = static_cast<int>(mesh.blocks.size());
  row.n_dofs = g.N_hat();

  WaveProblem problem;
  problem.c = ex.c;
  problem.t_end = ex.t_end;
  problem.cfl_fraction = ex.cfl_fraction;
  problem.source = PointSource{{0.0, 0.0}, ex.sigma, ex.t_source, 1.0};
  const SemiDiscreteSystem sys = build_system(g, problem);
  const TimeStep ts = stable_dt(sys, ex.cfl_fraction);
  row.steps = static_cast<long>(std::ceil(ex.t_end / ts.dt));
  row.dt = ex.t_end / static_cast<double>(row.steps);
  row.assembly_seconds = seconds_since(t0);

  const auto t1 = Clock::now();
  WaveState state = zero_state(sys);
  Rk4Integrator rk(sys);
  try {
    for (long k = 0; k < row.steps; ++k) rk.step(state, row.dt, k);
  } catch (const Error& e) {
    row.failed = true;
    row.failure = e.what();
    row.l2_error = row.log10_error = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  row.stepping_seconds = seconds_since(t1);

  PointSourceSolution exact;
  exact.sigma = ex.sigma;
  exact.t_source = ex.t_source;
  exact.c = ex.c;
  const ExactField u = exact_field(g.embedding.reduced_points, ex.t_end, exact);
  row.l2_error = l2_error(state.v, u.values, g.H_reduced, u.excluded);
  row.log10_error = std::log10(row.l2_error);
  return row;
}

std::vector<ConvergenceRow> run_convergence(const CircleExperiment& base, int first_level, int levels,
                                            const std::function<void(const ConvergenceRow&)>& on_row) {
  if (levels < 2) fail(ErrorCode::InvalidArgument, "converge: need at least two refinement levels");
  if (first_level < 0) fail(ErrorCode::InvalidArgument, "converge: first level must be >= 0");
  std::vector<ConvergenceRow> rows;
  for (int level = first_level; level < first_level + levels; ++level) {
    CircleExperiment ex = base;
    ex.refinement = level;
    ConvergenceRow row = run_circle_experiment(ex);
    if (!rows.empty() && !row.failed && !rows.back().failed)
      row.rate = convergence_rate(rows.back().l2_error, rows.back().n_dofs, row.l2_error, row.n_dofs);
    if (on_row) on_row(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_convergence_csv(const std::filesystem::path& path, const std::vector<ConvergenceRow>& rows) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << "p,n_blocks,N_dofs,l2_error,log10_error,rate_q\n";
  for (const ConvergenceRow& r : rows) {
    out << r.p << ',' << r.n_blocks << ',' << r.n_dofs << ',';
    if (r.failed)
      out << "FAILED,FAILED,FAILED\n";
    else
      out << fmt(r.l2_error) << ',' << fmt(r.log10_error) << ',' << (std::isnan(r.rate) ? "nan" : fmt(r.rate)) << '\n';
  }
}

RunConfig parse_run_config(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Configuration, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::Configuration, "config must be a JSON object");
  static const std::vector<std::string> known = {"c", "sigma", "t_source", "source_xy", "t_end", "cfl_fraction",
                                                 "snapshot_every", "boundary", "p", "amplitude"};
  for (const auto& [key, value] : doc.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      fail(ErrorCode::Configuration, "unknown config key '" + key + "'");

  RunConfig cfg;
  try {
    cfg.problem.c = doc.value("c", 1.0);
    cfg.problem.t_end = doc.value("t_end", cfg.problem.t_end);
    cfg.problem.cfl_fraction = doc.value("cfl_fraction", cfg.problem.cfl_fraction);
    cfg.snapshot_every = doc.value("snapshot_every", 0);
    cfg.p = doc.value("p", 5);
    if (doc.contains("source_xy")) {
      const auto xy = doc["source_xy"].get<std::vector<double>>();
      if (xy.size() != 2) fail(ErrorCode::Configuration, "source_xy must be [x, y]");
      PointSource src;
      src.position = {xy[0], xy[1]};
      src.sigma = doc.value("sigma", src.sigma);
      src.t_source = doc.value("t_source", src.t_source);
      src.amplitude = doc.value("amplitude", 1.0);
      cfg.problem.source = src;
    }
    if (doc.contains("boundary")) {
      for (const auto& [tag, bc] : doc["boundary"].items())
        cfg.problem.boundary_conditions[tag] = parse_boundary_condition(bc.get<std::string>());
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Configuration, std::string("config: ") + e.what());
  }
  if (!(cfg.problem.c > 0.0)) fail(ErrorCode::Configuration, "config: c must be positive");
  if (!(cfg.problem.t_end > 0.0)) fail(ErrorCode::Configuration, "config: t_end must be positive");
  // Values above 1 step past the RK4 stability limit; allowed for experiments.
  if (!(cfg.problem.cfl_fraction > 0.0) || cfg.problem.cfl_fraction > 10.0)
    fail(ErrorCode::Configuration, "config: cfl_fraction must lie in (0, 10]");
  if (cfg.snapshot_every < 0) fail(ErrorCode::Configuration, "config: snapshot_every must be >= 0");
  if (cfg.p < 1) fail(ErrorCode::Configuration, "config: p must be >= 1");
  if (cfg.problem.source && !(cfg.problem.source->sigma > 0.0)) fail(ErrorCode::Configuration, "config: sigma must be positive");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["status"] = status;
  if (!message.empty()) j["message"] = message;
  nlohmann::json params;
  params["c"] = config.problem.c;
  params["t_end"] = config.problem.t_end;
  params["cfl_fraction"] = config.problem.cfl_fraction;
  params["snapshot_every"] = config.snapshot_every;
  params["p"] = config.p;
  if (config.problem.source) {
    params["source_xy"] = {config.problem.source->position.x, config.problem.source->position.y};
    params["sigma"] = config.problem.source->sigma;
    params["t_source"] = config.problem.source->t_source;
    params["amplitude"] = config.problem.source->amplitude;
  }
  for (const auto& [tag, bc] : config.problem.boundary_conditions)
    params["boundary"][tag] = std::string(boundary_condition_name(bc));
  j["parameters"] = params;
  j["wall_time"] = {{"assembly", assembly_seconds}, {"stepping", stepping_seconds}};
  j["steps"] = steps;
  j["dt"] = dt;
  j["N_hat"] = n_hat;
  j["n_blocks"] = n_blocks;
  j["final_energy"] = final_energy;
  j["energy_nonincreasing"] = energy_nonincreasing;
  j["snapshot_hash"] = snapshot_hash;
  j["outputs"] = outputs;
  return j.dump(2);
}

namespace {

class Fnv1a {
 public:
  void add(std::string_view bytes) {
    for (unsigned char ch : bytes) {
      hash_ ^= ch;
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string snapshot_text(const GlobalOperators& g, const Vec& v) {
  const Vec ev = g.E() * v;
  const int per_block = g.n * g.n;
  std::string out;
  char line[128];
  for (std::size_t b = 0; b < g.blocks.size(); ++b) {
    out += "block " + std::to_string(b) + "\n";
    for (int i = 0; i < per_block; ++i) {
      const std::size_t k = b * per_block + i;
      std::snprintf(line, sizeof line, "%.12e %.12e %.12e\n", g.points[k].x, g.points[k].y, ev[static_cast<Eigen::Index>(k)]);
      out += line;
    }
  }
  return out;
}

}  // namespace

RunReport run_simulation(const MultiblockMesh& mesh, const RunConfig& config, const std::filesystem::path& out_dir) {
  RunReport report;
  report.config = config;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory " + out_dir.string() + ": " + ec.message());

  const auto t0 = Clock::now();
  const SbpOperator1D op = make_sbp_operator(config.p);
  const GlobalOperators g = assemble(mesh, op);
  const SemiDiscreteSystem sys = build_system(g, config.problem);
  const TimeStep ts = stable_dt(sys, config.problem.cfl_fraction);
  report.steps = static_cast<long>(std::ceil(config.problem.t_end / ts.dt));
  report.dt = config.problem.t_end / static_cast<double>(report.steps);
  report.n_hat = g.N_hat();
  report.n_blocks = static_cast<int>(mesh.blocks.size());
  report.assembly_seconds = seconds_since(t0);

  const double source_off =
      config.problem.source ? config.problem.source->t_source + 10.0 * config.problem.source->sigma : 0.0;

  Fnv1a hash;
  auto write_snapshot = [&](const WaveState& s, long step) {
    char name[96];
    std::snprintf(name, sizeof name, "snapshot_%06ld_t%.6f.txt", step, s.t);
    const std::string text = snapshot_text(g, s.v);
    std::ofstream out(out_dir / name);
    if (!out) fail(ErrorCode::Io, "cannot write snapshot " + (out_dir / name).string());
    out << text;
    hash.add(text);
    report.outputs.push_back((out_dir / name).string());
  };

  std::ofstream energy_log(out_dir / "energy.csv");
  if (!energy_log) fail(ErrorCode::Io, "cannot write energy log");
  energy_log << "step,t,energy\n" << std::setprecision(12) << std::scientific;
  report.outputs.push_back((out_dir / "energy.csv").string());

  WaveState state = zero_state(sys);
  Rk4Integrator rk(sys);
  double energy = discrete_energy(state, sys);
  energy_log << 0 << ',' << state.t << ',' << energy << '\n';
  write_snapshot(state, 0);

  double stepping = 0.0;
  try {
    for (long k = 1; k <= report.steps; ++k) {
      const auto ts0 = Clock::now();
      const double t_before = state.t;
      rk.step(state, report.dt, k);
      stepping += seconds_since(ts0);
      const double next = discrete_energy(state, sys);
      if (t_before >= source_off && next > energy * (1.0 + 1e-10) + 1e-300) report.energy_nonincreasing = false;
      energy = next;
      energy_log << k << ',' << state.t << ',' << energy << '\n';
      if (config.snapshot_every > 0 && k % config.snapshot_every == 0) write_snapshot(state, k);
    }
  } catch (const Error& e) {
    report.status = "diverged";
    report.message = e.what();
    report.stepping_seconds = stepping;
    report.snapshot_hash = hash.hex();
    std::ofstream(out_dir / "report.json") << report.to_json() << '\n';
    throw;
  }
  if (config.snapshot_every == 0) write_snapshot(state, report.steps);
  report.stepping_seconds = stepping;
  report.final_energy = energy;
  report.snapshot_hash = hash.hex();
  report.outputs.push_back((out_dir / "report.json").string());
  std::ofstream(out_dir / "report.json") << report.to_json() << '\n';
  return report;
}

}  // namespace sbpembed
