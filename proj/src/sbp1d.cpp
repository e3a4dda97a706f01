#include "sbpembed/sbp1d.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sbpembed/error.hpp"

namespace sbpembed {

Vec SbpOperator1D::e_l() const {
  Vec e = Vec::Zero(n);
  e[0] = 1.0;
  return e;
}

Vec SbpOperator1D::e_r() const {
  Vec e = Vec::Zero(n);
  e[n - 1] = 1.0;
  return e;
}

std::pair<Vec, Vec> lobatto_nodes_weights(int n) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "lobatto_nodes_weights: n must be >= 2, got " + std::to_string(n));

  const int N = n - 1;
  // Newton on (x P_N - P_{N-1}) from Chebyshev-Lobatto points; the endpoints
  // are fixed points of the iteration.
  Vec x(n), p_n(n), p_nm1(n);
  for (int j = 0; j < n; ++j) x[j] = -std::cos(std::numbers::pi * j / N);

  auto legendre = [&](const Vec& at) {
    for (int j = 0; j < n; ++j) {
      double p0 = 1.0, p1 = at[j];
      for (int k = 2; k <= N; ++k) {
        const double p2 = ((2.0 * k - 1.0) * at[j] * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      p_n[j] = N == 0 ? 1.0 : p1;
      p_nm1[j] = p0;
    }
  };

  constexpr int kMaxIter = 100;
  double change = 1.0;
  for (int it = 0; it < kMaxIter && change > 1e-15; ++it) {
    legendre(x);
    change = 0.0;
    for (int j = 1; j < N; ++j) {
      const double dx = (x[j] * p_n[j] - p_nm1[j]) / (n * p_n[j]);
      x[j] -= dx;
      change = std::max(change, std::abs(dx));
    }
  }
  if (change > 1e-13)
    fail(ErrorCode::Internal, "lobatto_nodes_weights: Newton iteration did not converge for n = " + std::to_string(n));

  // Exact symmetry about the midpoint.
  for (int j = 0; j < n / 2; ++j) {
    const double s = 0.5 * (x[N - j] - x[j]);
    x[j] = -s;
    x[N - j] = s;
  }
  if (n % 2 == 1) x[N / 2] = 0.0;
  x[0] = -1.0;
  x[N] = 1.0;

  legendre(x);
  Vec nodes(n), weights(n);
  for (int j = 0; j < n; ++j) {
    nodes[j] = 0.5 * (x[j] + 1.0);
    weights[j] = 1.0 / (N * (N + 1.0) * p_n[j] * p_n[j]);
  }
  nodes[0] = 0.0;
  nodes[N] = 1.0;
  return {nodes, weights};
}

Mat derivative_matrix(const Vec& nodes) {
  const Eigen::Index n = nodes.size();
  if (n < 2) fail(ErrorCode::InvalidArgument, "derivative_matrix: need at least two nodes");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(nodes[i] > nodes[i - 1]))
      fail(ErrorCode::InvalidArgument, "derivative_matrix: nodes must be distinct and ascending (index " +
                                           std::to_string(i) + ")");

  // Barycentric weights.
  Vec bw = Vec::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) bw[i] /= (nodes[i] - nodes[j]);

  Mat D = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      D(i, j) = (bw[j] / bw[i]) / (nodes[i] - nodes[j]);
      diag -= D(i, j);
    }
    D(i, i) = diag;
  }
  return D;
}

SbpOperator1D make_sbp_operator(int p) {
  if (p < 1) fail(ErrorCode::InvalidArgument, "make_sbp_operator: order must be >= 1, got " + std::to_string(p));
  SbpOperator1D op;
  op.p = p;
  op.n = p + 1;
  auto [nodes, weights] = lobatto_nodes_weights(op.n);
  op.nodes = std::move(nodes);
  op.weights = std::move(weights);
  op.D1 = derivative_matrix(op.nodes);
  return op;
}

double sbp_residual(const SbpOperator1D& op) {
  const Mat HD = op.weights.asDiagonal() * op.D1;
  Mat R = HD + HD.transpose();
  R(0, 0) += 1.0;
  R(op.n - 1, op.n - 1) -= 1.0;
  return R.cwiseAbs().maxCoeff();
}

Mat second_derivative_variable(const SbpOperator1D& op, const Vec& b) {
  if (b.size() != op.n)
    fail(ErrorCode::InvalidArgument, "second_derivative_variable: coefficient length " + std::to_string(b.size()) +
                                         " does not match operator size " + std::to_string(op.n));
  return op.D1 * (b.asDiagonal() * op.D1);
}

}  // namespace sbpembed
