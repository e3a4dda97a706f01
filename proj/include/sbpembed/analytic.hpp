#pragma once

#include <vector>

#include "sbpembed/types.hpp"

namespace sbpembed {

/// Free-space response to a point source with Gaussian time signature,
/// u = 1/(sigma (2 pi)^{3/2}) int_0^inf exp(-(t - t_s - r cosh w)^2 / (2 sigma^2)) dw
/// for unit speed; other speeds rescale r by 1/c and u by 1/c^2.
struct PointSourceSolution {
  Point source{0.0, 0.0};
  double sigma = 0.04;
  double t_source = 0.3;
  double c = 1.0;           // wave speed; r is measured in travel time r / c
  double tolerance = 1e-12;  // quadrature tolerance

  /// Upper integration limit beyond which the integrand is below e^-72 of its peak.
  double omega_max(double r, double t) const;
};

/// Throws Domain at the source point itself.
double exact_u(double x, double y, double t, const PointSourceSolution& params);

struct ExactField {
  Vec values;
  /// Indices of points within 1e-10 of the source; their value is 0 and
  /// they must be excluded from error norms.
  std::vector<int> excluded;
};

ExactField exact_field(const std::vector<Point>& points, double t, const PointSourceSolution& params);

}  // namespace sbpembed
