#include "sbpembed/analytic.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sbpembed/error.hpp"

namespace sbpembed {

double PointSourceSolution::omega_max(double r, double t) const {
  return std::acosh(std::max(1.0, (t - t_source + 12.0 * sigma) / r)) + 1.0;
}

double exact_u(double x, double y, double t, const PointSourceSolution& params) {
  if (!(params.sigma > 0.0) || !(params.tolerance > 0.0) || !(params.c > 0.0))
    fail(ErrorCode::InvalidArgument, "exact_u: sigma, tolerance and c must be positive");
  // Rescaling to unit speed turns r into a travel time.
  const double r = std::hypot(x - params.source.x, y - params.source.y) / params.c;
  if (r == 0.0) {
    std::ostringstream s;
    s << "exact_u: evaluation at the source point (" << x << ", " << y << ")";
    fail(ErrorCode::Domain, s.str());
  }
  const double sigma = params.sigma;
  const double lag = t - params.t_source;
  const double two_s2 = 2.0 * sigma * sigma;
  auto integrand = [&](double w) {
    const double d = lag - r * std::cosh(w);
    return std::exp(-d * d / two_s2);
  };

  const double upper = params.omega_max(r, t);
  // Split at the peak where r cosh(w) = t - t_s so both pieces are unimodal.
  const double peak = lag > r ? std::min(std::acosh(lag / r), upper) : 0.0;

  // Boost halves the absolute tolerance per level and stalls at round-off on
  // the tail side of the front, so depth is capped and the error checked here.
  using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;
  constexpr unsigned kMaxDepth = 12;
  double sum = 0.0, l1_total = 0.0, err_total = 0.0;
  auto piece = [&](double a, double b) {
    double err = 0.0, l1 = 0.0;
    sum += Quad::integrate(integrand, a, b, kMaxDepth, params.tolerance, &err, &l1);
    err_total += err;
    l1_total += l1;
  };
  if (peak > 0.0) piece(0.0, peak);
  piece(peak, upper);
  if (err_total > 100.0 * params.tolerance * l1_total + std::numeric_limits<double>::min()) {
    std::ostringstream s;
    s << "exact_u: quadrature did not reach tolerance at r = " << r << ", t = " << t << " (error " << err_total
      << ")";
    fail(ErrorCode::Internal, s.str());
  }
  return sum / (sigma * std::pow(2.0 * std::numbers::pi, 1.5) * params.c * params.c);
}

ExactField exact_field(const std::vector<Point>& points, double t, const PointSourceSolution& params) {
  constexpr double kSourceTol = 1e-10;
  ExactField f;
  f.values = Vec::Zero(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (distance(points[i], params.source) <= kSourceTol) {
      f.excluded.push_back(static_cast<int>(i));
      continue;
    }
    try {
      f.values[static_cast<Eigen::Index>(i)] = exact_u(points[i].x, points[i].y, t, params);
    } catch (const Error& e) {
      fail(e.code(), "exact_field: point " + std::to_string(i) + ": " + e.what());
    }
  }
  return f;
}

}  // namespace sbpembed
