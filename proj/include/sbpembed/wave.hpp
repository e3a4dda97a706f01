#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sbpembed/assembly.hpp"
#include "sbpembed/types.hpp"

namespace sbpembed {

enum class BoundaryCondition { Dirichlet, Neumann, Outflow };

BoundaryCondition parse_boundary_condition(std::string_view name);
std::string_view boundary_condition_name(BoundaryCondition bc);

/// Gaussian pulse f(t) = exp(-(t - t_s)^2 / (2 sigma^2)) / (sigma sqrt(2 pi)).
double forcing(double t, double sigma, double t_source);

struct PointSource {
  Point position{0.0, 0.0};
  double sigma = 0.04;
  double t_source = 0.3;
  double amplitude = 1.0;
};

struct WaveProblem {
  double c = 1.0;
  /// Boundary tag -> condition. A tag missing here that is itself named
  /// "dirichlet", "neumann" or "outflow" maps to that condition.
  std::map<std::string, BoundaryCondition> boundary_conditions;
  std::optional<PointSource> source;
  double t_end = 0.8;
  double cfl_fraction = 0.2;
};

/// P = I - H^{-1} L^T (L H^{-1} L^T)^{-1} L for unit-selector rows L.
struct Projection {
  SpMat P;
  Vec mask;  // diagonal of P: 0 on constrained points, 1 elsewhere
  std::vector<int> constrained;

  Vec apply(const Vec& v) const { return mask.cwiseProduct(v); }
};

/// Duplicated indices are merged before L is formed.
Projection build_projection(std::vector<int> dirichlet_nodes, const Vec& H);
Projection identity_projection(int size);

/// v_tt = A v + B v_t + P d_s f(t) on the reduced grid.
struct SemiDiscreteSystem {
  double c = 1.0;
  SpMat A;
  SpMat B;
  Projection projection;
  Vec H;
  Vec source_vector;  // P d_s, zero without a source
  std::optional<PointSource> source;
  // Energy monitor pieces: D_x^+ E, D_y^+ E and H^+.
  SpMat Gx, Gy;
  Vec H_plus;

  int size() const { return static_cast<int>(H.size()); }
  Vec forcing_at(double t) const;
};

/// Single nonzero 1 / H_ii at the reduced point matching `position` to 1e-10.
Vec dirac_vector(Point position, const std::vector<Point>& reduced_points, const Vec& H);

SemiDiscreteSystem build_system(const GlobalOperators& ops, const WaveProblem& problem);

struct TimeStep {
  double dt = 0.0;
  double spectral_radius = 0.0;
  int iterations = 0;
  bool from_power_iteration = true;  // false: Gershgorin fallback
};

/// dt = theta * 2 sqrt(2) / sqrt(rho), with rho the spectral radius of -A from
/// H-weighted power iteration (relative tolerance 1e-3, 500 iterations).
TimeStep stable_dt(const SemiDiscreteSystem& system, double theta, unsigned seed = 12345);

struct WaveState {
  Vec v;
  Vec v_t;
  double t = 0.0;
};

WaveState zero_state(const SemiDiscreteSystem& system);

/// Classical RK4 on the first-order form; reuses its stage buffers.
class Rk4Integrator {
 public:
  explicit Rk4Integrator(const SemiDiscreteSystem& system);

  /// Throws Divergence when the new state is not finite.
  void step(WaveState& state, double dt, long step_index = 0);

 private:
  void rhs(const Vec& v, const Vec& v_t, double t, Vec& dv, Vec& dv_t) const;

  const SemiDiscreteSystem& system_;
  Vec k1v_, k1a_, k2v_, k2a_, k3v_, k3a_, k4v_, k4a_, tmp_v_, tmp_a_;
};

WaveState rk4_step(const SemiDiscreteSystem& system, const WaveState& state, double dt);

/// ||v_t||_H^2 + c^2 ||D_x^+ E P v||_{H+}^2 + c^2 ||D_y^+ E P v||_{H+}^2.
double discrete_energy(const WaveState& state, const SemiDiscreteSystem& system);

/// sqrt(sum_i H_ii (v_i - u_i)^2) over all points not in `excluded`.
double l2_error(const Vec& v, const Vec& exact, const Vec& H, const std::vector<int>& excluded = {});

/// log(e1 / e2) / log(sqrt(N2 / N1)); NaN when either error is zero.
double convergence_rate(double e1, double N1, double e2, double N2);

}  // namespace sbpembed
