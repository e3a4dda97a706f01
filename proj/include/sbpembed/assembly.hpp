#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sbpembed/geometry.hpp"
#include "sbpembed/mesh.hpp"
#include "sbpembed/sbp1d.hpp"
#include "sbpembed/types.hpp"

namespace sbpembed {

/// 0/1 matrix E with S = E S_hat: copies each unique grid value to every
/// block that owns a duplicate of that point.
struct EmbeddingOperator {
  SpMat E;                   // N x N_hat
  std::vector<int> row_map;  // non-reduced index -> reduced index
  int N = 0;
  int N_hat = 0;
  std::vector<Point> reduced_points;
};

/// Physical-boundary operators of one tag, acting on reduced vectors.
/// Rows run over (block, side, node) in ascending order.
struct BoundaryStack {
  std::vector<BlockSide> sides;
  std::vector<int> nodes;  // reduced index of each row
  SpMat e;                 // rows x N_hat selector
  SpMat d;                 // rows x N_hat normal derivative
  Vec H;                   // boundary quadrature per row
};

struct GlobalOperators {
  int n = 0;  // nodes per block direction
  std::vector<BlockOperators> blocks;
  std::vector<Point> points;  // non-reduced grid S, block after block
  EmbeddingOperator embedding;

  Vec H_plus;
  SpMat D_L_plus, Dx_plus, Dy_plus;
  SpMat D_L_tilde_plus;  // with interface SATs

  Vec H_reduced;
  SpMat D_L_reduced;
  std::map<std::string, BoundaryStack> boundaries;

  int N() const { return embedding.N; }
  int N_hat() const { return embedding.N_hat; }
  const SpMat& E() const { return embedding.E; }
};

/// Duplicates are found from interface connectivity alone (union-find over
/// matched side nodes, smallest global index as representative). Matched
/// nodes farther apart than 1e-10 (relative to the mesh extent) raise
/// InconsistentMesh.
EmbeddingOperator build_embedding(const MultiblockMesh& mesh, const std::vector<Point>& points, int n);

/// Interface SATs penalizing the normal-derivative jump on the owner side,
/// the lexicographically smaller (block, side). Returns D_L^+ plus the SATs.
SpMat assemble_interface_sats(const MultiblockMesh& mesh, const std::vector<BlockOperators>& blocks,
                              const SpMat& D_L_plus, const Vec& H_plus);

/// H_reduced = E^T H^+ E and D_L = H_reduced^{-1} E^T H^+ D~_L^+ E.
std::pair<Vec, SpMat> assemble_reduced(const SpMat& E, const Vec& H_plus, const SpMat& D_L_tilde_plus);

std::map<std::string, BoundaryStack> stack_boundary_operators(const MultiblockMesh& mesh,
                                                              const std::vector<BlockOperators>& blocks,
                                                              const EmbeddingOperator& embedding);

/// Runs the full recipe: block ordering and E, non-reduced operators,
/// interface SATs, reduced inner product, reduced Laplacian.
GlobalOperators assemble(const MultiblockMesh& mesh, const SbpOperator1D& op);

/// Relative residual of the multiblock Green identity on reduced vectors.
double green_residual_global(const GlobalOperators& ops, const Vec& u, const Vec& v);

/// Coordinate-format dump, one "row col value" line per stored entry.
void write_coo(const std::filesystem::path& path, const SpMat& m);
void write_coo(const std::filesystem::path& path, const Vec& diagonal);

}  // namespace sbpembed
