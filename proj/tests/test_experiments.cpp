#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "sbpembed/error.hpp"
#include "sbpembed/experiments.hpp"

using namespace sbpembed;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_snapshots(const fs::path& dir) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().rfind("snapshot_", 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_CASE("verification suite passes and catches a corrupted weight") {
  VerifyOptions o;
  o.orders = {5};
  o.random_pairs = 10;
  int seen = 0;
  const auto ok = run_verification(o, [&](const CheckResult&) { ++seen; });
  CHECK(seen == static_cast<int>(ok.size()));
  for (const auto& r : ok) CHECK_MESSAGE(r.passed, r.name);
  o.perturb_weight = true;
  const auto bad = run_verification(o);
  int failed = 0;
  for (const auto& r : bad) failed += !r.passed;
  CHECK(failed > 0);
  o.orders = {0};
  CHECK_THROWS_AS(run_verification(o), Error);
}

TEST_CASE("run config parsing") {
  const RunConfig c = parse_run_config(
      R"({"c": 2, "sigma": 0.05, "t_source": 0.2, "source_xy": [0.1, 0.2], "t_end": 0.5,
          "cfl_fraction": 0.1, "snapshot_every": 10, "p": 3, "boundary": {"rim": "outflow"}})");
  CHECK(c.problem.c == 2.0);
  REQUIRE(c.problem.source.has_value());
  CHECK(c.problem.source->sigma == 0.05);
  CHECK(c.problem.source->position.y == 0.2);
  CHECK(c.problem.t_end == 0.5);
  CHECK(c.snapshot_every == 10);
  CHECK(c.p == 3);
  CHECK(c.problem.boundary_conditions.at("rim") == BoundaryCondition::Outflow);

  const RunConfig d = parse_run_config("{}");
  CHECK_FALSE(d.problem.source.has_value());
  CHECK(d.problem.cfl_fraction == doctest::Approx(0.2));

  for (const char* bad : {"[1]", "{oops", R"({"speed": 1})", R"({"c": -1})", R"({"cfl_fraction": 20})",
                          R"({"source_xy": [1]})", R"({"boundary": {"rim": "robin"}})", R"({"snapshot_every": -3})"}) {
    CAPTURE(bad);
    try {
      parse_run_config(bad);
      FAIL("expected Configuration");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Configuration);
    }
  }
}

TEST_CASE("simulation writes snapshots, energy log and report") {
  const MultiblockMesh mesh = generate_circle_mesh(0);
  RunConfig cfg = parse_run_config(
      R"({"source_xy": [0, 0], "t_end": 0.5, "snapshot_every": 7, "p": 4, "boundary": {"dirichlet": "neumann"}})");
  const fs::path dir = fresh_dir("sbpembed_run_a");
  const RunReport r = run_simulation(mesh, cfg, dir);
  CHECK(r.status == "ok");
  CHECK(r.steps > 0);
  CHECK(r.dt * r.steps == doctest::Approx(0.5));
  CHECK(count_snapshots(dir) == r.steps / 7 + 1);
  for (const auto& out : r.outputs) CHECK_MESSAGE(fs::exists(out), out);

  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["steps"].get<long>() == r.steps);
  CHECK(report["N_hat"].get<int>() == r.n_hat);
  CHECK(report["snapshot_hash"].get<std::string>() == r.snapshot_hash);

  std::ifstream energy(dir / "energy.csv");
  std::string line;
  int rows = -1;
  while (std::getline(energy, line)) ++rows;
  CHECK(rows == r.steps + 1);

  // Snapshot layout: one section per block, n*n rows of "x y v".
  std::istringstream first(slurp(dir / "snapshot_000000_t0.000000.txt"));
  int headers = 0, points = 0;
  while (std::getline(first, line)) {
    if (line.rfind("block ", 0) == 0)
      ++headers;
    else
      ++points;
  }
  CHECK(headers == 5);
  CHECK(points == 5 * 25);

  const fs::path again = fresh_dir("sbpembed_run_b");
  CHECK(run_simulation(mesh, cfg, again).snapshot_hash == r.snapshot_hash);
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST_CASE("zero amplitude gives identically zero snapshots") {
  const MultiblockMesh mesh = generate_circle_mesh(0);
  const RunConfig cfg = parse_run_config(R"({"source_xy": [0, 0], "amplitude": 0, "t_end": 0.2, "snapshot_every": 5, "p": 4})");
  const fs::path dir = fresh_dir("sbpembed_run_zero");
  run_simulation(mesh, cfg, dir);
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename().string().rfind("snapshot_", 0) != 0) continue;
    std::istringstream in(slurp(e.path()));
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("block ", 0) == 0) continue;
      double x, y, v;
      std::istringstream(line) >> x >> y >> v;
      CHECK(v == 0.0);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("off-grid source is a configuration error surfaced before stepping") {
  const RunConfig cfg = parse_run_config(R"({"source_xy": [0.0123, 0], "p": 3})");
  const fs::path dir = fresh_dir("sbpembed_run_offgrid");
  try {
    run_simulation(generate_circle_mesh(0), cfg, dir);
    FAIL("expected Configuration");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Configuration);
  }
  CHECK(count_snapshots(dir) == 0);
  fs::remove_all(dir);
}

TEST_CASE("divergence keeps earlier snapshots and reports") {
  const RunConfig cfg = parse_run_config(
      R"({"source_xy": [0, 0], "cfl_fraction": 3.0, "t_end": 40, "snapshot_every": 1, "p": 5})");
  const fs::path dir = fresh_dir("sbpembed_run_diverge");
  try {
    run_simulation(generate_circle_mesh(1), cfg, dir);
    FAIL("expected Divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Divergence);
  }
  CHECK(count_snapshots(dir) > 1);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["status"] == "diverged");
  fs::remove_all(dir);
}

TEST_CASE("convergence driver and CSV") {
  CircleExperiment ex;
  ex.p = 4;
  const auto rows = run_convergence(ex, 0, 2);
  REQUIRE(rows.size() == 2);
  CHECK(std::isnan(rows[0].rate));
  CHECK(rows[1].n_dofs > rows[0].n_dofs);
  CHECK(rows[1].l2_error < rows[0].l2_error);
  CHECK(rows[1].rate == doctest::Approx(convergence_rate(rows[0].l2_error, rows[0].n_dofs, rows[1].l2_error,
                                                         rows[1].n_dofs)));
  CHECK_THROWS_AS(run_convergence(ex, 0, 1), Error);

  auto failed = rows;
  failed[1].failed = true;
  const fs::path csv = fs::temp_directory_path() / "sbpembed_conv.csv";
  write_convergence_csv(csv, failed);
  std::istringstream in(slurp(csv));
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "p,n_blocks,N_dofs,l2_error,log10_error,rate_q");
  CHECK(first.find("nan") != std::string::npos);
  CHECK(second.find("FAILED") != std::string::npos);
  fs::remove(csv);
}
