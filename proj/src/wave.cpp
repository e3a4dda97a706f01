#include "sbpembed/wave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "sbpembed/error.hpp"

namespace sbpembed {

BoundaryCondition parse_boundary_condition(std::string_view name) {
  if (name == "dirichlet") return BoundaryCondition::Dirichlet;
  if (name == "neumann") return BoundaryCondition::Neumann;
  if (name == "outflow") return BoundaryCondition::Outflow;
  fail(ErrorCode::Configuration, "unknown boundary condition '" + std::string(name) +
                                     "' (expected dirichlet, neumann or outflow)");
}

std::string_view boundary_condition_name(BoundaryCondition bc) {
  switch (bc) {
    case BoundaryCondition::Dirichlet: return "dirichlet";
    case BoundaryCondition::Neumann: return "neumann";
    case BoundaryCondition::Outflow: return "outflow";
  }
  return "?";
}

double forcing(double t, double sigma, double t_source) {
  const double d = t - t_source;
  return std::exp(-d * d / (2.0 * sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

Projection identity_projection(int size) {
  Projection p;
  p.mask = Vec::Ones(size);
  p.P = sparse_diagonal(p.mask);
  return p;
}

Projection build_projection(std::vector<int> dirichlet_nodes, const Vec& H) {
  const int N = static_cast<int>(H.size());
  std::sort(dirichlet_nodes.begin(), dirichlet_nodes.end());
  dirichlet_nodes.erase(std::unique(dirichlet_nodes.begin(), dirichlet_nodes.end()), dirichlet_nodes.end());
  if (dirichlet_nodes.empty()) return identity_projection(N);

  const int m = static_cast<int>(dirichlet_nodes.size());
  std::vector<Triplet> l;
  for (int i = 0; i < m; ++i) {
    if (dirichlet_nodes[i] < 0 || dirichlet_nodes[i] >= N)
      fail(ErrorCode::InvalidArgument, "build_projection: constrained index out of range");
    l.emplace_back(i, dirichlet_nodes[i], 1.0);
  }
  SpMat L(m, N);
  L.setFromTriplets(l.begin(), l.end());

  const Vec Hinv = H.cwiseInverse();
  const SpMat HinvLt = Hinv.asDiagonal() * SpMat(L.transpose());
  const SpMat G = L * HinvLt;
  Vec Ginv(m);
  for (int r = 0; r < G.outerSize(); ++r) {
    double diag = 0.0;
    for (SpMat::InnerIterator it(G, r); it; ++it) {
      if (it.col() != r && it.value() != 0.0)
        fail(ErrorCode::Internal, "build_projection: constraint rows are not independent");
      if (it.col() == r) diag = it.value();
    }
    if (!(diag > 0.0)) fail(ErrorCode::Internal, "build_projection: singular constraint matrix");
    Ginv[r] = 1.0 / diag;
  }

  Projection p;
  p.constrained = std::move(dirichlet_nodes);
  const SpMat P = sparse_diagonal(Vec::Ones(N)) - SpMat(HinvLt * Ginv.asDiagonal() * L);
  // Exactly 0/1 in exact arithmetic; snap the rounding so constrained rows vanish.
  p.mask.resize(N);
  for (int i = 0; i < N; ++i) {
    const double d = P.coeff(i, i);
    if (std::abs(d) <= 1e-12)
      p.mask[i] = 0.0;
    else if (std::abs(d - 1.0) <= 1e-12)
      p.mask[i] = 1.0;
    else
      fail(ErrorCode::Internal, "build_projection: projection is not a 0/1 selector");
  }
  p.P = sparse_diagonal(p.mask);
  p.P.prune(0.0);
  return p;
}

Vec dirac_vector(Point position, const std::vector<Point>& reduced_points, const Vec& H) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < reduced_points.size(); ++i) {
    const double d = distance(reduced_points[i], position);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  if (best < 0 || best_d > 1e-10) {
    std::ostringstream s;
    s << "source (" << position.x << ", " << position.y << ") is not a grid point";
    if (best >= 0)
      s << "; nearest grid point is (" << reduced_points[best].x << ", " << reduced_points[best].y << ") at distance "
        << best_d;
    fail(ErrorCode::Configuration, s.str());
  }
  Vec d = Vec::Zero(H.size());
  d[best] = 1.0 / H[best];
  return d;
}

Vec SemiDiscreteSystem::forcing_at(double t) const {
  if (!source) return Vec::Zero(size());
  return source_vector * (source->amplitude * forcing(t, source->sigma, source->t_source));
}

SemiDiscreteSystem build_system(const GlobalOperators& ops, const WaveProblem& problem) {
  if (!(problem.c > 0.0)) fail(ErrorCode::Configuration, "wave speed c must be positive");
  if (problem.source && !(problem.source->sigma > 0.0)) fail(ErrorCode::Configuration, "source sigma must be positive");

  const int N = ops.N_hat();
  std::map<std::string, BoundaryCondition> bc_of;
  for (const auto& [tag, stack] : ops.boundaries) {
    auto it = problem.boundary_conditions.find(tag);
    if (it != problem.boundary_conditions.end()) {
      bc_of[tag] = it->second;
    } else if (tag == "dirichlet" || tag == "neumann" || tag == "outflow") {
      bc_of[tag] = parse_boundary_condition(tag);
    } else {
      fail(ErrorCode::Configuration, "boundary tag '" + tag + "' has no boundary condition assigned");
    }
  }

  // Points on any Dirichlet side are constrained and drop out of the SATs.
  std::vector<int> dirichlet;
  for (const auto& [tag, stack] : ops.boundaries)
    if (bc_of[tag] == BoundaryCondition::Dirichlet) dirichlet.insert(dirichlet.end(), stack.nodes.begin(), stack.nodes.end());
  const std::set<int> constrained(dirichlet.begin(), dirichlet.end());

  SemiDiscreteSystem sys;
  sys.c = problem.c;
  sys.H = ops.H_reduced;
  sys.projection = build_projection(dirichlet, ops.H_reduced);

  std::vector<Triplet> sat_a, sat_b;
  for (const auto& [tag, stack] : ops.boundaries) {
    const BoundaryCondition bc = bc_of[tag];
    if (bc == BoundaryCondition::Dirichlet) continue;
    for (int r = 0; r < stack.d.outerSize(); ++r) {
      const int node = stack.nodes[r];
      if (constrained.count(node)) continue;
      const double w = -stack.H[r] / ops.H_reduced[node];
      for (SpMat::InnerIterator it(stack.d, r); it; ++it) sat_a.emplace_back(node, it.col(), w * it.value());
      if (bc == BoundaryCondition::Outflow) sat_b.emplace_back(node, node, w);
    }
  }
  SpMat satA(N, N), satB(N, N);
  satA.setFromTriplets(sat_a.begin(), sat_a.end());
  satB.setFromTriplets(sat_b.begin(), sat_b.end());

  const auto& mask = sys.projection.mask;
  const double c2 = problem.c * problem.c;
  sys.A = (c2 * mask).asDiagonal() * SpMat(ops.D_L_reduced + satA) * mask.asDiagonal();
  sys.A.prune(0.0);
  sys.B = (problem.c * mask).asDiagonal() * satB * mask.asDiagonal();
  sys.B.prune(0.0);

  sys.source = problem.source;
  if (problem.source)
    sys.source_vector = sys.projection.apply(dirac_vector(problem.source->position, ops.embedding.reduced_points, ops.H_reduced));
  else
    sys.source_vector = Vec::Zero(N);

  sys.Gx = ops.Dx_plus * ops.E();
  sys.Gy = ops.Dy_plus * ops.E();
  sys.H_plus = ops.H_plus;
  return sys;
}

TimeStep stable_dt(const SemiDiscreteSystem& system, double theta, unsigned seed) {
  if (!(theta > 0.0)) fail(ErrorCode::InvalidArgument, "stable_dt: CFL fraction must be positive");
  const int N = system.size();
  const Vec& H = system.H;
  auto h_norm = [&](const Vec& x) { return std::sqrt(x.dot(H.cwiseProduct(x))); };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec x(N);
  for (int i = 0; i < N; ++i) x[i] = dist(rng);
  x = system.projection.apply(x);

  TimeStep out;
  constexpr int kMaxIter = 500;
  constexpr double kTol = 1e-3;
  double lambda = 0.0;
  bool converged = false;
  const double x_norm = h_norm(x);
  if (x_norm > 0.0) {
    x /= x_norm;
    for (int it = 1; it <= kMaxIter; ++it) {
      const Vec y = -(system.A * x);
      const double next = x.dot(H.cwiseProduct(y));
      const double y_norm = h_norm(y);
      out.iterations = it;
      if (y_norm == 0.0) break;
      x = y / y_norm;
      if (it > 1 && std::abs(next - lambda) <= kTol * std::abs(next)) {
        lambda = next;
        converged = true;
        break;
      }
      lambda = next;
    }
  }

  if (converged && lambda > 0.0) {
    out.spectral_radius = lambda;
  } else {
    // Max absolute row sum bounds every eigenvalue.
    double bound = 0.0;
    for (int r = 0; r < system.A.outerSize(); ++r) {
      double s = 0.0;
      for (SpMat::InnerIterator it(system.A, r); it; ++it) s += std::abs(it.value());
      bound = std::max(bound, s);
    }
    out.spectral_radius = bound;
    out.from_power_iteration = false;
  }
  if (!(out.spectral_radius > 0.0)) fail(ErrorCode::InvalidArgument, "stable_dt: operator has zero spectral radius");
  out.dt = theta * 2.0 * std::numbers::sqrt2 / std::sqrt(out.spectral_radius);
  return out;
}

WaveState zero_state(const SemiDiscreteSystem& system) {
  return {Vec::Zero(system.size()), Vec::Zero(system.size()), 0.0};
}

Rk4Integrator::Rk4Integrator(const SemiDiscreteSystem& system) : system_(system) {
  const int N = system.size();
  for (Vec* v : {&k1v_, &k1a_, &k2v_, &k2a_, &k3v_, &k3a_, &k4v_, &k4a_, &tmp_v_, &tmp_a_}) v->setZero(N);
}

void Rk4Integrator::rhs(const Vec& v, const Vec& v_t, double t, Vec& dv, Vec& dv_t) const {
  dv = v_t;
  dv_t.noalias() = system_.A * v;
  if (system_.B.nonZeros() > 0) dv_t.noalias() += system_.B * v_t;
  if (system_.source) dv_t += system_.source_vector * (system_.source->amplitude *
                                                       forcing(t, system_.source->sigma, system_.source->t_source));
}

void Rk4Integrator::step(WaveState& s, double dt, long step_index) {
  const double t = s.t;
  rhs(s.v, s.v_t, t, k1v_, k1a_);
  tmp_v_ = s.v + 0.5 * dt * k1v_;
  tmp_a_ = s.v_t + 0.5 * dt * k1a_;
  rhs(tmp_v_, tmp_a_, t + 0.5 * dt, k2v_, k2a_);
  tmp_v_ = s.v + 0.5 * dt * k2v_;
  tmp_a_ = s.v_t + 0.5 * dt * k2a_;
  rhs(tmp_v_, tmp_a_, t + 0.5 * dt, k3v_, k3a_);
  tmp_v_ = s.v + dt * k3v_;
  tmp_a_ = s.v_t + dt * k3a_;
  rhs(tmp_v_, tmp_a_, t + dt, k4v_, k4a_);
  s.v += (dt / 6.0) * (k1v_ + 2.0 * k2v_ + 2.0 * k3v_ + k4v_);
  s.v_t += (dt / 6.0) * (k1a_ + 2.0 * k2a_ + 2.0 * k3a_ + k4a_);
  s.t = t + dt;
  if (!s.v.allFinite() || !s.v_t.allFinite())
    fail(ErrorCode::Divergence, "solution diverged (non-finite values) at step " + std::to_string(step_index));
}

WaveState rk4_step(const SemiDiscreteSystem& system, const WaveState& state, double dt) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "rk4_step: dt must be positive");
  WaveState next = state;
  Rk4Integrator(system).step(next, dt);
  return next;
}

double discrete_energy(const WaveState& state, const SemiDiscreteSystem& system) {
  double e = state.v_t.dot(system.H.cwiseProduct(state.v_t));
  if (system.Gx.size() == 0) return e;
  const Vec pv = system.projection.apply(state.v);
  const Vec gx = system.Gx * pv, gy = system.Gy * pv;
  const double c2 = system.c * system.c;
  e += c2 * (gx.dot(system.H_plus.cwiseProduct(gx)) + gy.dot(system.H_plus.cwiseProduct(gy)));
  return e;
}

double l2_error(const Vec& v, const Vec& exact, const Vec& H, const std::vector<int>& excluded) {
  if (v.size() != exact.size() || v.size() != H.size()) fail(ErrorCode::InvalidArgument, "l2_error: size mismatch");
  Vec diff = v - exact;
  for (int i : excluded) diff[i] = 0.0;
  return std::sqrt(diff.dot(H.cwiseProduct(diff)));
}

double convergence_rate(double e1, double N1, double e2, double N2) {
  if (!(e1 > 0.0) || !(e2 > 0.0) || !(N1 > 0.0) || !(N2 > 0.0) || N1 == N2)
    return std::numeric_limits<double>::quiet_NaN();
  return std::log(e1 / e2) / std::log(std::sqrt(N2 / N1));
}

}  // namespace sbpembed
