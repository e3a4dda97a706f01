#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sbpembed/error.hpp"
#include "sbpembed/wave.hpp"

using namespace sbpembed;

namespace {

// v_tt = -v_t on a single unknown; RK4 advances v_t by its stability polynomial.
SemiDiscreteSystem damped_scalar() {
  SemiDiscreteSystem s;
  s.A = SpMat(1, 1);
  s.B = SpMat(1, 1);
  s.B.insert(0, 0) = -1.0;
  s.H = Vec::Ones(1);
  s.projection = identity_projection(1);
  s.source_vector = Vec::Zero(1);
  return s;
}

MultiblockMesh tagged_disc(int refinement) {
  MultiblockMesh m = generate_circle_mesh(refinement);
  for (auto& [bs, tag] : m.boundary_tags) {
    const Point mid = m.blocks[bs.block].edge(bs.side)(0.5);
    const double a = std::atan2(mid.y, mid.x);
    tag = std::abs(a) < std::numbers::pi / 4 ? "open" : (std::abs(a) > 3 * std::numbers::pi / 4 ? "clamped" : "rigid");
  }
  return m;
}

WaveProblem mixed_problem(bool with_outflow) {
  WaveProblem pr;
  pr.boundary_conditions = {{"clamped", BoundaryCondition::Dirichlet},
                            {"rigid", BoundaryCondition::Neumann},
                            {"open", with_outflow ? BoundaryCondition::Outflow : BoundaryCondition::Neumann}};
  return pr;
}

WaveState bump(const GlobalOperators& g, const SemiDiscreteSystem& sys) {
  WaveState s = zero_state(sys);
  for (int i = 0; i < g.N_hat(); ++i) {
    const Point p = g.embedding.reduced_points[i];
    s.v[i] = std::exp(-((p.x - 0.2) * (p.x - 0.2) + (p.y + 0.1) * (p.y + 0.1)) / (2 * 0.15 * 0.15));
  }
  s.v = sys.projection.apply(s.v);
  return s;
}

}  // namespace

TEST_CASE("forcing pulse") {
  CHECK(forcing(0.3, 0.04, 0.3) == doctest::Approx(9.97356).epsilon(1e-6));
  CHECK(forcing(0.3 + 0.04, 0.04, 0.3) == doctest::Approx(9.97356 * std::exp(-0.5)).epsilon(1e-6));
}

TEST_CASE("RK4 reproduces its stability polynomial") {
  const SemiDiscreteSystem s = damped_scalar();
  WaveState st{Vec::Zero(1), Vec::Ones(1), 0.0};
  const WaveState next = rk4_step(s, st, 0.1);
  CHECK(next.v_t[0] == doctest::Approx(0.9048375).epsilon(1e-12));
  CHECK(next.v[0] == doctest::Approx(0.1 - 0.005 + 0.1 * 0.01 / 6 - 0.0001 / 24).epsilon(1e-12));
  CHECK(next.t == doctest::Approx(0.1));
  CHECK_THROWS_AS(rk4_step(s, st, 0.0), Error);
}

TEST_CASE("convergence rate formula") {
  CHECK(convergence_rate(1.0, 100, 0.1, 400) == doctest::Approx(3.3219).epsilon(1e-4));
  // Table pair (8681, -3.08) -> (13456, -3.98).
  CHECK(convergence_rate(std::pow(10.0, -3.08), 8681, std::pow(10.0, -3.98), 13456) ==
        doctest::Approx(9.45).epsilon(5e-3));
  CHECK(std::isnan(convergence_rate(0.0, 100, 0.1, 400)));
  CHECK(std::isnan(convergence_rate(1.0, 100, 0.1, 100)));
}

TEST_CASE("boundary condition names") {
  CHECK(parse_boundary_condition("outflow") == BoundaryCondition::Outflow);
  CHECK(boundary_condition_name(BoundaryCondition::Neumann) == "neumann");
  try {
    parse_boundary_condition("robin");
    FAIL("expected Configuration");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Configuration);
  }
}

TEST_CASE("projection") {
  const Vec H = (Vec(5) << 1, 2, 3, 4, 5).finished();
  const Projection P = build_projection({3, 1, 3}, H);
  CHECK(P.constrained == std::vector<int>{1, 3});
  const Mat Pd = Mat(P.P);
  CHECK((Pd * Pd - Pd).cwiseAbs().maxCoeff() < 1e-15);
  const Mat HP = H.asDiagonal() * Pd;
  CHECK((HP - HP.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(P.mask[1] == 0.0);
  CHECK(P.mask[0] == 1.0);
  CHECK_THROWS_AS(build_projection({7}, H), Error);
}

TEST_CASE("Dirac source") {
  const GlobalOperators g = assemble(generate_circle_mesh(1), make_sbp_operator(5));
  const Vec d = dirac_vector({0.0, 0.0}, g.embedding.reduced_points, g.H_reduced);
  CHECK(g.H_reduced.dot(d) == doctest::Approx(1.0));
  CHECK((d.array() != 0.0).count() == 1);
  try {
    dirac_vector({0.013, 0.0}, g.embedding.reduced_points, g.H_reduced);
    FAIL("expected Configuration");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Configuration);
  }
}

TEST_CASE("semi-discrete operators have the energy structure") {
  const MultiblockMesh m = tagged_disc(0);
  const GlobalOperators g = assemble(m, make_sbp_operator(4));
  const SemiDiscreteSystem sys = build_system(g, mixed_problem(true));
  const Mat HA = g.H_reduced.asDiagonal() * Mat(sys.A);
  const Mat HB = g.H_reduced.asDiagonal() * Mat(sys.B);
  const double scale = HA.cwiseAbs().maxCoeff();
  CHECK((HA - HA.transpose()).cwiseAbs().maxCoeff() < 1e-10 * scale);
  CHECK((HB - HB.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::SelfAdjointEigenSolver<Mat> ea(0.5 * (HA + HA.transpose()));
  CHECK(ea.eigenvalues().maxCoeff() < 1e-9 * scale);
  CHECK(HB.diagonal().maxCoeff() <= 0.0);
  CHECK(HB.diagonal().minCoeff() < 0.0);
  // Constrained rows and columns vanish.
  for (int k : sys.projection.constrained) {
    CHECK(Mat(sys.A).row(k).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Mat(sys.A).col(k).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("stable time step") {
  const GlobalOperators g = assemble(generate_circle_mesh(0), make_sbp_operator(4));
  WaveProblem pr;
  const SemiDiscreteSystem sys = build_system(g, pr);
  const TimeStep ts = stable_dt(sys, 0.2);
  CHECK(ts.from_power_iteration);
  // Largest eigenvalue of -A from a dense symmetric solve in the H-weighted basis.
  const Vec s = g.H_reduced.cwiseSqrt();
  const Mat S = s.asDiagonal() * Mat(-sys.A) * s.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()));
  const double rho = es.eigenvalues().maxCoeff();
  CHECK(ts.spectral_radius <= rho * (1 + 1e-10));
  CHECK(ts.spectral_radius >= 0.9 * rho);
  CHECK(stable_dt(sys, 0.4).dt == doctest::Approx(2 * ts.dt));
  CHECK_THROWS_AS(stable_dt(sys, 0.0), Error);
}

TEST_CASE("energy is conserved without outflow and decays with it") {
  const MultiblockMesh m = tagged_disc(1);
  const GlobalOperators g = assemble(m, make_sbp_operator(5));
  for (bool outflow : {false, true}) {
    const SemiDiscreteSystem sys = build_system(g, mixed_problem(outflow));
    const double dt = stable_dt(sys, 0.2).dt;
    WaveState st = bump(g, sys);
    Rk4Integrator rk(sys);
    const double e0 = discrete_energy(st, sys);
    double prev = e0;
    bool monotone = true;
    for (int k = 0; k < 400; ++k) {
      rk.step(st, dt, k);
      const double e = discrete_energy(st, sys);
      monotone = monotone && e <= prev * (1 + 1e-10);
      prev = e;
    }
    CAPTURE(outflow);
    CHECK(monotone);
    if (outflow)
      CHECK(prev < 0.9 * e0);
    else
      CHECK(std::abs(prev - e0) <= 1e-6 * e0);
  }
}

TEST_CASE("zero amplitude source leaves the field at rest") {
  const GlobalOperators g = assemble(generate_circle_mesh(1), make_sbp_operator(3));
  WaveProblem pr;
  pr.source = PointSource{{0, 0}, 0.04, 0.3, 0.0};
  const SemiDiscreteSystem sys = build_system(g, pr);
  WaveState st = zero_state(sys);
  Rk4Integrator rk(sys);
  for (int k = 0; k < 50; ++k) rk.step(st, 0.01, k);
  CHECK(st.v.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("errors") {
  const GlobalOperators g = assemble(tagged_disc(0), make_sbp_operator(3));
  WaveProblem pr;
  try {
    build_system(g, pr);
    FAIL("expected Configuration for unmapped tags");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Configuration);
  }
  const SemiDiscreteSystem sys = build_system(g, mixed_problem(false));
  WaveState st = bump(g, sys);
  Rk4Integrator rk(sys);
  const double dt = 50 * stable_dt(sys, 0.2).dt;
  try {
    for (int k = 0; k < 100000; ++k) rk.step(st, dt, k);
    FAIL("expected Divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Divergence);
  }
  CHECK_THROWS_AS(l2_error(Vec::Zero(2), Vec::Zero(3), Vec::Zero(2)), Error);
}
