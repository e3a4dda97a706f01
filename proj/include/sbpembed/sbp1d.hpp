#pragma once

#include <utility>

#include "sbpembed/types.hpp"

namespace sbpembed {

/// First-derivative SBP operator on Gauss-Lobatto nodes of [0, 1].
///
/// The norm H is diagonal (the Lobatto weights) and D1 is the dense
/// differentiation matrix of the Lagrange interpolant through the nodes, so
/// polynomials of degree `p = n - 1` are differentiated exactly and
/// H D1 + D1^T H = e_r e_r^T - e_l e_l^T holds to rounding.
struct SbpOperator1D {
  int p = 0;
  int n = 0;
  Vec nodes;
  Vec weights;
  Mat D1;

  Vec e_l() const;
  Vec e_r() const;
};

/// Gauss-Lobatto nodes and weights mapped to [0, 1]; exact for degree 2n-3.
std::pair<Vec, Vec> lobatto_nodes_weights(int n);

/// Lagrange differentiation matrix on distinct ascending nodes.
Mat derivative_matrix(const Vec& nodes);

/// Operator of polynomial exactness `p` on p + 1 Lobatto nodes.
SbpOperator1D make_sbp_operator(int p);

/// max |H D1 + D1^T H + e_l e_l^T - e_r e_r^T|.
double sbp_residual(const SbpOperator1D& op);

/// D1 diag(b) D1, approximating d/dx (b d/dx).
Mat second_derivative_variable(const SbpOperator1D& op, const Vec& b);

}  // namespace sbpembed
