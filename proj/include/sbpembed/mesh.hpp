#pragma once

#include <array>
#include <compare>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sbpembed/sbp1d.hpp"
#include "sbpembed/types.hpp"

namespace sbpembed {

/// Block sides in edge-storage order. South is eta = 0, east xi = 1,
/// north eta = 1, west xi = 0.
enum class Side : int { South = 0, East = 1, North = 2, West = 3 };

inline constexpr std::array<Side, 4> kAllSides{Side::South, Side::East, Side::North, Side::West};

std::string_view side_name(Side side);
Side parse_side(std::string_view name);

/// Parametrized boundary curve s in [0, 1] -> (x, y).
class CurvedEdge {
 public:
  enum class Kind { Line, Arc, Polynomial };

  static CurvedEdge line(Point from, Point to);
  static CurvedEdge arc(Point center, double radius, double theta0, double theta1);
  /// Monomial coefficients, lowest degree first.
  static CurvedEdge polynomial(std::vector<double> cx, std::vector<double> cy);

  Point operator()(double s) const;
  Point from() const { return (*this)(0.0); }
  Point to() const { return (*this)(1.0); }

  /// Same point set traversed from `to` to `from`.
  CurvedEdge reversed() const;
  /// Restriction to [s0, s1], reparametrized onto [0, 1].
  CurvedEdge sub(double s0, double s1) const;

  Kind kind() const { return kind_; }
  Point line_from() const { return a_; }
  Point line_to() const { return b_; }
  Point center() const { return a_; }
  double radius() const { return radius_; }
  double theta0() const { return theta0_; }
  double theta1() const { return theta1_; }
  const std::vector<double>& coeffs_x() const { return cx_; }
  const std::vector<double>& coeffs_y() const { return cy_; }

 private:
  Kind kind_ = Kind::Line;
  Point a_, b_;
  double radius_ = 0.0, theta0_ = 0.0, theta1_ = 0.0;
  std::vector<double> cx_, cy_;
};

/// Curved quadrilateral. Edges are stored south, east, north, west; south and
/// north are parametrized along increasing xi, east and west along
/// increasing eta.
struct Block {
  std::array<CurvedEdge, 4> edges;

  const CurvedEdge& edge(Side side) const { return edges[static_cast<int>(side)]; }
};

enum class Orientation { Aligned, Reversed };

struct BlockSide {
  int block = 0;
  Side side = Side::South;

  auto operator<=>(const BlockSide&) const = default;
};

/// Two block sides that carry the same grid points. With `Reversed`, node k
/// of side a meets node n-1-k of side b.
struct Interface {
  BlockSide a;
  BlockSide b;
  Orientation orientation = Orientation::Aligned;
};

struct MultiblockMesh {
  std::vector<Block> blocks;
  std::vector<Interface> interfaces;
  /// Exterior sides only.
  std::map<BlockSide, std::string> boundary_tags;
};

/// Transfinite interpolation of the four edges at (xi, eta) in [0, 1]^2.
Point coons_patch(const Block& block, double xi, double eta);

/// Mapped tensor grid of the operator nodes. Index i * n + j holds
/// (xi_i, eta_j), i.e. eta varies fastest.
std::vector<Point> block_grid(const Block& block, const SbpOperator1D& op);

/// Splits a block into four children (SW, SE, NW, NE) through edge midpoints
/// and the patch center. Boundary edges keep their curve kind.
std::array<Block, 4> quadrisect(const Block& block);

/// Unit disc: central square of half-width `half_width` plus four ring
/// blocks whose east side is the circular arc, each quadrisected
/// `refinement` times. All exterior sides carry `tag`.
MultiblockMesh generate_circle_mesh(int refinement, const std::string& tag = "dirichlet", double half_width = 0.5);

/// nx-by-ny array of straight-sided blocks covering [x0, x1] x [y0, y1].
MultiblockMesh generate_rectangle_mesh(int nx, int ny, Point lower, Point upper, const std::string& tag = "dirichlet");

/// Single block r in [r_inner, r_outer], angle in [0, pi/2]; south side is
/// the inner arc, traversed from angle pi/2 down to 0.
Block quarter_annulus_block(double r_inner = 1.0, double r_outer = 2.0);

/// Builds interfaces by matching coincident sides; unmatched sides get `tag`.
MultiblockMesh connect_blocks(std::vector<Block> blocks, const std::string& tag, double tol = 1e-10);

/// Empty when every structural and geometric invariant holds; otherwise one
/// message per violation naming the block and side.
std::vector<std::string> validate_mesh(const MultiblockMesh& mesh);

/// Parses the JSON mesh format without validating geometry.
MultiblockMesh parse_mesh(std::string_view text);
/// Reads, parses and validates; throws on the first schema error or on any
/// validation failure.
MultiblockMesh load_mesh(const std::filesystem::path& path);
std::string mesh_to_json(const MultiblockMesh& mesh);
void save_mesh(const MultiblockMesh& mesh, const std::filesystem::path& path);

}  // namespace sbpembed
