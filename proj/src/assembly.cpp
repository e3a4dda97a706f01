#include "sbpembed/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "sbpembed/error.hpp"

namespace sbpembed {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  // The smaller index becomes the root, so roots are the canonical
  // representatives.
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<int> parent_;
};

int side_node(const std::vector<int>& nodes, int k, Orientation o) {
  const int n = static_cast<int>(nodes.size());
  return nodes[o == Orientation::Aligned ? k : n - 1 - k];
}

std::vector<int> local_side_nodes(int n, Side s) {
  std::vector<int> idx(n);
  for (int k = 0; k < n; ++k) {
    switch (s) {
      case Side::West: idx[k] = k; break;
      case Side::East: idx[k] = (n - 1) * n + k; break;
      case Side::South: idx[k] = k * n; break;
      case Side::North: idx[k] = k * n + n - 1; break;
    }
  }
  return idx;
}

SpMat block_diagonal(const std::vector<BlockOperators>& blocks, SpMat BlockOperators::*member) {
  if (blocks.empty()) return {};
  const int nb2 = static_cast<int>((blocks.front().*member).rows());
  std::vector<Triplet> entries;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const SpMat& m = blocks[b].*member;
    const int off = static_cast<int>(b) * nb2;
    for (int r = 0; r < m.outerSize(); ++r)
      for (SpMat::InnerIterator it(m, r); it; ++it) entries.emplace_back(off + r, off + it.col(), it.value());
  }
  const int N = nb2 * static_cast<int>(blocks.size());
  SpMat out(N, N);
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

}  // namespace

EmbeddingOperator build_embedding(const MultiblockMesh& mesh, const std::vector<Point>& points, int n) {
  const int nb = static_cast<int>(mesh.blocks.size());
  const int per_block = n * n;
  const int N = nb * per_block;
  if (static_cast<int>(points.size()) != N)
    fail(ErrorCode::InvalidArgument, "build_embedding: expected " + std::to_string(N) + " grid points, got " +
                                         std::to_string(points.size()));

  DisjointSets sets(N);
  for (const Interface& f : mesh.interfaces) {
    const auto na = local_side_nodes(n, f.a.side);
    const auto nb_nodes = local_side_nodes(n, f.b.side);
    for (int k = 0; k < n; ++k)
      sets.unite(f.a.block * per_block + na[k], f.b.block * per_block + side_node(nb_nodes, k, f.orientation));
  }

  double extent = 1.0;
  for (const Point& p : points) extent = std::max({extent, std::abs(p.x), std::abs(p.y)});
  const double tol = 1e-10 * extent;

  EmbeddingOperator emb;
  emb.N = N;
  emb.row_map.assign(N, -1);
  std::vector<int> reduced_of_root(N, -1);
  for (int i = 0; i < N; ++i) {
    const int root = sets.find(i);
    if (reduced_of_root[root] < 0) {
      reduced_of_root[root] = static_cast<int>(emb.reduced_points.size());
      emb.reduced_points.push_back(points[root]);
    }
    emb.row_map[i] = reduced_of_root[root];
    const double gap = distance(points[i], points[root]);
    if (gap > tol) {
      std::ostringstream s;
      s << "grid point " << i % per_block << " of block " << i / per_block << " is matched to point "
        << root % per_block << " of block " << root / per_block << " but they are " << gap << " apart";
      fail(ErrorCode::InconsistentMesh, s.str());
    }
  }
  emb.N_hat = static_cast<int>(emb.reduced_points.size());

  std::vector<Triplet> entries;
  entries.reserve(N);
  for (int i = 0; i < N; ++i) entries.emplace_back(i, emb.row_map[i], 1.0);
  emb.E.resize(N, emb.N_hat);
  emb.E.setFromTriplets(entries.begin(), entries.end());
  return emb;
}

SpMat assemble_interface_sats(const MultiblockMesh& mesh, const std::vector<BlockOperators>& blocks,
                              const SpMat& D_L_plus, const Vec& H_plus) {
  if (blocks.empty()) return D_L_plus;
  const int n = blocks.front().n;
  const int per_block = n * n;
  std::vector<Triplet> entries;

  for (std::size_t k = 0; k < mesh.interfaces.size(); ++k) {
    const Interface& f = mesh.interfaces[k];
    const bool a_owns = f.a < f.b;
    const BlockSide own = a_owns ? f.a : f.b;
    const BlockSide nbr = a_owns ? f.b : f.a;
    const SideOperators& so = blocks[own.block].side(own.side);
    const SideOperators& sn = blocks[nbr.block].side(nbr.side);

    const double scale = so.H.cwiseAbs().maxCoeff();
    for (int j = 0; j < n; ++j) {
      const int jn = f.orientation == Orientation::Aligned ? j : n - 1 - j;
      if (std::abs(so.H[j] - sn.H[jn]) > 1e-10 * scale) {
        std::ostringstream s;
        s << "interface " << k << " is not conforming: boundary quadratures differ by "
          << std::abs(so.H[j] - sn.H[jn]) << " at node " << j;
        fail(ErrorCode::Unsupported, s.str());
      }
    }

    for (int j = 0; j < n; ++j) {
      const int jn = f.orientation == Orientation::Aligned ? j : n - 1 - j;
      const int row = own.block * per_block + so.nodes[j];
      const double w = -so.H[j] / H_plus[row];
      for (SpMat::InnerIterator it(so.d, j); it; ++it)
        entries.emplace_back(row, own.block * per_block + it.col(), w * it.value());
      for (SpMat::InnerIterator it(sn.d, jn); it; ++it)
        entries.emplace_back(row, nbr.block * per_block + it.col(), w * it.value());
    }
  }

  SpMat sat(D_L_plus.rows(), D_L_plus.cols());
  sat.setFromTriplets(entries.begin(), entries.end());
  SpMat out = D_L_plus + sat;
  out.makeCompressed();
  return out;
}

std::pair<Vec, SpMat> assemble_reduced(const SpMat& E, const Vec& H_plus, const SpMat& D_L_tilde_plus) {
  const SpMat Et = E.transpose();
  Vec H_reduced = Et * H_plus;  // E has one unit entry per row
  const SpMat weighted = Et * (H_plus.asDiagonal() * D_L_tilde_plus);
  SpMat D = H_reduced.cwiseInverse().asDiagonal() * (weighted * E);
  D.makeCompressed();
  return {std::move(H_reduced), std::move(D)};
}

std::map<std::string, BoundaryStack> stack_boundary_operators(const MultiblockMesh& mesh,
                                                              const std::vector<BlockOperators>& blocks,
                                                              const EmbeddingOperator& emb) {
  std::map<BlockSide, bool> on_interface;
  for (const Interface& f : mesh.interfaces) on_interface[f.a] = on_interface[f.b] = true;
  for (int b = 0; b < static_cast<int>(mesh.blocks.size()); ++b)
    for (Side s : kAllSides)
      if (!on_interface.count({b, s}) && !mesh.boundary_tags.count({b, s}))
        fail(ErrorCode::Configuration, "block " + std::to_string(b) + " side " + std::string(side_name(s)) +
                                           " is exterior but has no boundary tag");

  struct Rows {
    std::vector<BlockSide> sides;
    std::vector<int> nodes;
    std::vector<Triplet> d;
    std::vector<double> H;
  };
  std::map<std::string, Rows> rows;
  const int n = blocks.empty() ? 0 : blocks.front().n;
  const int per_block = n * n;
  for (const auto& [bs, tag] : mesh.boundary_tags) {
    Rows& r = rows[tag];
    r.sides.push_back(bs);
    const SideOperators& so = blocks[bs.block].side(bs.side);
    for (int k = 0; k < n; ++k) {
      const int row = static_cast<int>(r.nodes.size());
      r.nodes.push_back(emb.row_map[bs.block * per_block + so.nodes[k]]);
      r.H.push_back(so.H[k]);
      for (SpMat::InnerIterator it(so.d, k); it; ++it)
        r.d.emplace_back(row, emb.row_map[bs.block * per_block + it.col()], it.value());
    }
  }

  std::map<std::string, BoundaryStack> out;
  for (auto& [tag, r] : rows) {
    BoundaryStack st;
    const int m = static_cast<int>(r.nodes.size());
    st.sides = std::move(r.sides);
    st.nodes = r.nodes;
    st.H = Eigen::Map<const Vec>(r.H.data(), m);
    std::vector<Triplet> e;
    for (int i = 0; i < m; ++i) e.emplace_back(i, r.nodes[i], 1.0);
    st.e.resize(m, emb.N_hat);
    st.e.setFromTriplets(e.begin(), e.end());
    st.d.resize(m, emb.N_hat);
    st.d.setFromTriplets(r.d.begin(), r.d.end());
    out.emplace(tag, std::move(st));
  }
  return out;
}

GlobalOperators assemble(const MultiblockMesh& mesh, const SbpOperator1D& op) {
  GlobalOperators g;
  g.n = op.n;
  const int nb = static_cast<int>(mesh.blocks.size());
  const int per_block = op.n * op.n;
  const TensorOperators t = tensor_operators(op);

  // Step 1: block order is mesh order; stack coordinates and build E.
  g.points.resize(static_cast<std::size_t>(nb) * per_block);
  for (int b = 0; b < nb; ++b) {
    const auto grid = block_grid(mesh.blocks[b], op);
    std::copy(grid.begin(), grid.end(), g.points.begin() + static_cast<std::ptrdiff_t>(b) * per_block);
  }
  g.embedding = build_embedding(mesh, g.points, op.n);

  // Step 2: non-reduced operators, assembled independently per block.
  g.blocks.resize(nb);
  std::string failure;
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < nb; ++b) {
    Vec x(per_block), y(per_block);
    for (int i = 0; i < per_block; ++i) {
      x[i] = g.points[b * per_block + i].x;
      y[i] = g.points[b * per_block + i].y;
    }
    try {
      g.blocks[b] = block_operators(op, t, x, y, b);
    } catch (const Error& e) {
#pragma omp critical
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) fail(ErrorCode::InvalidMapping, failure);

  g.H_plus.resize(static_cast<Eigen::Index>(nb) * per_block);
  for (int b = 0; b < nb; ++b) g.H_plus.segment(static_cast<Eigen::Index>(b) * per_block, per_block) = g.blocks[b].H;
  g.D_L_plus = block_diagonal(g.blocks, &BlockOperators::D_L);
  g.Dx_plus = block_diagonal(g.blocks, &BlockOperators::Dx);
  g.Dy_plus = block_diagonal(g.blocks, &BlockOperators::Dy);
  g.boundaries = stack_boundary_operators(mesh, g.blocks, g.embedding);

  // Step 3: interface SATs.
  g.D_L_tilde_plus = assemble_interface_sats(mesh, g.blocks, g.D_L_plus, g.H_plus);

  // Steps 4 and 5: reduced inner product and Laplacian.
  std::tie(g.H_reduced, g.D_L_reduced) = assemble_reduced(g.embedding.E, g.H_plus, g.D_L_tilde_plus);
  return g;
}

double green_residual_global(const GlobalOperators& ops, const Vec& u, const Vec& v) {
  const double lap = u.dot(ops.H_reduced.cwiseProduct(ops.D_L_reduced * v));
  const Vec Eu = ops.E() * u, Ev = ops.E() * v;
  const double gx = (ops.Dx_plus * Eu).dot(ops.H_plus.cwiseProduct(ops.Dx_plus * Ev));
  const double gy = (ops.Dy_plus * Eu).dot(ops.H_plus.cwiseProduct(ops.Dy_plus * Ev));
  double bnd = 0.0, largest = std::max({std::abs(lap), std::abs(gx), std::abs(gy)});
  for (const auto& [tag, st] : ops.boundaries) {
    const double term = (st.e * u).dot(st.H.cwiseProduct(st.d * v));
    bnd += term;
    largest = std::max(largest, std::abs(term));
  }
  return std::abs(lap + gx + gy - bnd) / (1.0 + largest);
}

void write_coo(const std::filesystem::path& path, const SpMat& m) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << std::setprecision(17);
  for (int r = 0; r < m.outerSize(); ++r)
    for (SpMat::InnerIterator it(m, r); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

void write_coo(const std::filesystem::path& path, const Vec& diagonal) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < diagonal.size(); ++i) out << i << ' ' << i << ' ' << diagonal[i] << '\n';
}

}  // namespace sbpembed
