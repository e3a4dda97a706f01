#pragma once

#include <array>
#include <vector>

#include "sbpembed/mesh.hpp"
#include "sbpembed/sbp1d.hpp"
#include "sbpembed/types.hpp"

namespace sbpembed {

/// Kronecker extensions of a 1D operator to the n-by-n reference grid.
struct TensorOperators {
  int n = 0;
  SpMat D_xi;   // D1 (x) I
  SpMat D_eta;  // I (x) D1
  Vec H_xi;     // diagonal of H (x) I
  Vec H_eta;    // diagonal of I (x) H
  /// Block-local node indices of each side, ordered along the side.
  std::array<std::vector<int>, 4> side_nodes;
  /// n-by-n^2 restriction operators.
  std::array<SpMat, 4> e;

  const std::vector<int>& nodes(Side s) const { return side_nodes[static_cast<int>(s)]; }
};

TensorOperators tensor_operators(const SbpOperator1D& op);

/// Metric coefficients of the mapped grid, evaluated pointwise.
struct Metric {
  Vec x_xi, x_eta, y_xi, y_eta;
  Vec J, alpha1, beta, alpha2;
  /// sqrt(x_xi^2 + y_xi^2) and sqrt(x_eta^2 + y_eta^2) on the full grid;
  /// W1 scales the south/north quadratures, W2 the west/east ones.
  Vec W1, W2;
};

/// Metric derivatives come from the same D_xi, D_eta used by the scheme.
/// Throws InvalidMapping if J <= 0 anywhere; `block_id` is for the message.
Metric metric_terms(const TensorOperators& t, const Vec& x, const Vec& y, int block_id = -1);

SpMat laplace_block(const Metric& m, const TensorOperators& t);
std::pair<SpMat, SpMat> first_derivatives(const Metric& m, const TensorOperators& t);

struct SideOperators {
  std::vector<int> nodes;  // block-local indices along the side
  SpMat d;                 // n-by-n^2 outward normal derivative
  Vec H;                   // boundary quadrature
  Vec nx, ny;              // outward unit normal
};

struct BlockOperators {
  int n = 0;
  Metric metric;
  SpMat D_L, Dx, Dy;
  Vec H;  // diagonal of H_xi H_eta J
  std::array<SideOperators, 4> sides;

  const SideOperators& side(Side s) const { return sides[static_cast<int>(s)]; }
};

std::array<SideOperators, 4> boundary_operators(const Metric& m, const SpMat& Dx, const SpMat& Dy,
                                                const TensorOperators& t, const SbpOperator1D& op);

/// All per-block operators for the mapped grid (x, y).
BlockOperators block_operators(const SbpOperator1D& op, const TensorOperators& t, const Vec& x, const Vec& y,
                               int block_id = -1);
BlockOperators block_operators(const SbpOperator1D& op, const Block& block, int block_id = -1);

/// Relative residual of the single-block discrete Green identity
///   (u, D_L v)_H + (Dx u, Dx v)_H + (Dy u, Dy v)_H - sum_k <e_k u, d_k v>_{H_k}
/// divided by 1 + the largest of the individual terms.
double green_residual_block(const BlockOperators& ops, const Vec& u, const Vec& v);

}  // namespace sbpembed
