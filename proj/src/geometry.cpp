#include "sbpembed/geometry.hpp"

#include <cmath>
#include <sstream>

#include "sbpembed/error.hpp"

namespace sbpembed {

TensorOperators tensor_operators(const SbpOperator1D& op) {
  const int n = op.n;
  const int N = n * n;
  TensorOperators t;
  t.n = n;

  std::vector<Triplet> dxi, deta;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (op.D1(i, k) != 0.0) dxi.emplace_back(i * n + j, k * n + j, op.D1(i, k));
        if (op.D1(j, k) != 0.0) deta.emplace_back(i * n + j, i * n + k, op.D1(j, k));
      }
  t.D_xi.resize(N, N);
  t.D_xi.setFromTriplets(dxi.begin(), dxi.end());
  t.D_eta.resize(N, N);
  t.D_eta.setFromTriplets(deta.begin(), deta.end());

  t.H_xi.resize(N);
  t.H_eta.resize(N);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      t.H_xi[i * n + j] = op.weights[i];
      t.H_eta[i * n + j] = op.weights[j];
    }

  for (Side s : kAllSides) {
    auto& idx = t.side_nodes[static_cast<int>(s)];
    idx.resize(n);
    for (int k = 0; k < n; ++k) {
      switch (s) {
        case Side::West: idx[k] = k; break;
        case Side::East: idx[k] = (n - 1) * n + k; break;
        case Side::South: idx[k] = k * n; break;
        case Side::North: idx[k] = k * n + n - 1; break;
      }
    }
    SpMat e(n, N);
    for (int k = 0; k < n; ++k) e.insert(k, idx[k]) = 1.0;
    e.makeCompressed();
    t.e[static_cast<int>(s)] = std::move(e);
  }
  return t;
}

Metric metric_terms(const TensorOperators& t, const Vec& x, const Vec& y, int block_id) {
  Metric m;
  m.x_xi = t.D_xi * x;
  m.x_eta = t.D_eta * x;
  m.y_xi = t.D_xi * y;
  m.y_eta = t.D_eta * y;
  m.J = m.x_xi.cwiseProduct(m.y_eta) - m.x_eta.cwiseProduct(m.y_xi);
  for (Eigen::Index i = 0; i < m.J.size(); ++i) {
    if (!(m.J[i] > 0.0)) {
      std::ostringstream s;
      s << "non-positive Jacobian " << m.J[i] << " in block " << block_id << " at grid point " << i << " ("
        << x[i] << ", " << y[i] << ")";
      fail(ErrorCode::InvalidMapping, s.str());
    }
  }
  const Vec Jinv = m.J.cwiseInverse();
  m.alpha1 = Jinv.cwiseProduct(m.x_eta.cwiseAbs2() + m.y_eta.cwiseAbs2());
  m.beta = -Jinv.cwiseProduct(m.x_xi.cwiseProduct(m.x_eta) + m.y_xi.cwiseProduct(m.y_eta));
  m.alpha2 = Jinv.cwiseProduct(m.x_xi.cwiseAbs2() + m.y_xi.cwiseAbs2());
  m.W1 = (m.x_xi.cwiseAbs2() + m.y_xi.cwiseAbs2()).cwiseSqrt();
  m.W2 = (m.x_eta.cwiseAbs2() + m.y_eta.cwiseAbs2()).cwiseSqrt();
  return m;
}

SpMat laplace_block(const Metric& m, const TensorOperators& t) {
  const Mat Dxi(t.D_xi), Deta(t.D_eta);
  Mat L = Dxi * (m.alpha1.asDiagonal() * Dxi);
  L.noalias() += Deta * (m.beta.asDiagonal() * Dxi);
  L.noalias() += Dxi * (m.beta.asDiagonal() * Deta);
  L.noalias() += Deta * (m.alpha2.asDiagonal() * Deta);
  return to_sparse(m.J.cwiseInverse().asDiagonal() * L);
}

std::pair<SpMat, SpMat> first_derivatives(const Metric& m, const TensorOperators& t) {
  const Vec Jinv = m.J.cwiseInverse();
  SpMat Dx = Jinv.cwiseProduct(m.y_eta).asDiagonal() * t.D_xi - Jinv.cwiseProduct(m.y_xi).asDiagonal() * t.D_eta;
  SpMat Dy = Jinv.cwiseProduct(m.x_xi).asDiagonal() * t.D_eta - Jinv.cwiseProduct(m.x_eta).asDiagonal() * t.D_xi;
  Dx.prune(0.0);
  Dy.prune(0.0);
  return {std::move(Dx), std::move(Dy)};
}

std::array<SideOperators, 4> boundary_operators(const Metric& m, const SpMat& Dx, const SpMat& Dy,
                                                const TensorOperators& t, const SbpOperator1D& op) {
  const int n = t.n;
  std::array<SideOperators, 4> out;
  for (Side s : kAllSides) {
    SideOperators& so = out[static_cast<int>(s)];
    so.nodes = t.nodes(s);
    so.H.resize(n);
    so.nx.resize(n);
    so.ny.resize(n);
    for (int k = 0; k < n; ++k) {
      const int i = so.nodes[k];
      const bool xi_side = s == Side::West || s == Side::East;
      const double W = xi_side ? m.W2[i] : m.W1[i];
      so.H[k] = op.weights[k] * W;
      switch (s) {
        case Side::West: so.nx[k] = -m.y_eta[i]; so.ny[k] = m.x_eta[i]; break;
        case Side::East: so.nx[k] = m.y_eta[i]; so.ny[k] = -m.x_eta[i]; break;
        case Side::South: so.nx[k] = m.y_xi[i]; so.ny[k] = -m.x_xi[i]; break;
        case Side::North: so.nx[k] = -m.y_xi[i]; so.ny[k] = m.x_xi[i]; break;
      }
      so.nx[k] /= W;
      so.ny[k] /= W;
    }
    const SpMat& e = t.e[static_cast<int>(s)];
    so.d = so.nx.asDiagonal() * (e * Dx) + so.ny.asDiagonal() * (e * Dy);
    so.d.prune(0.0);
  }
  return out;
}

BlockOperators block_operators(const SbpOperator1D& op, const TensorOperators& t, const Vec& x, const Vec& y,
                               int block_id) {
  BlockOperators b;
  b.n = t.n;
  b.metric = metric_terms(t, x, y, block_id);
  b.D_L = laplace_block(b.metric, t);
  std::tie(b.Dx, b.Dy) = first_derivatives(b.metric, t);
  b.H = t.H_xi.cwiseProduct(t.H_eta).cwiseProduct(b.metric.J);
  b.sides = boundary_operators(b.metric, b.Dx, b.Dy, t, op);
  return b;
}

BlockOperators block_operators(const SbpOperator1D& op, const Block& block, int block_id) {
  const TensorOperators t = tensor_operators(op);
  const auto grid = block_grid(block, op);
  Vec x(grid.size()), y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    x[i] = grid[i].x;
    y[i] = grid[i].y;
  }
  return block_operators(op, t, x, y, block_id);
}

double green_residual_block(const BlockOperators& ops, const Vec& u, const Vec& v) {
  const Vec& H = ops.H;
  const double lap = u.dot(H.cwiseProduct(ops.D_L * v));
  const double gx = (ops.Dx * u).dot(H.cwiseProduct(ops.Dx * v));
  const double gy = (ops.Dy * u).dot(H.cwiseProduct(ops.Dy * v));
  double bnd = 0.0, largest = std::max({std::abs(lap), std::abs(gx), std::abs(gy)});
  for (const SideOperators& s : ops.sides) {
    const Vec dv = s.d * v;
    double term = 0.0;
    for (std::size_t k = 0; k < s.nodes.size(); ++k) term += u[s.nodes[k]] * s.H[k] * dv[k];
    bnd += term;
    largest = std::max(largest, std::abs(term));
  }
  return std::abs(lap + gx + gy - bnd) / (1.0 + largest);
}

}  // namespace sbpembed
