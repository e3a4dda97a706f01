#pragma once

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace sbpembed {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Diagonal matrix with `d` on the diagonal, in sparse storage.
SpMat sparse_diagonal(const Vec& d);

/// Dense to sparse, dropping entries that are exactly zero.
SpMat to_sparse(const Mat& m);

}  // namespace sbpembed
