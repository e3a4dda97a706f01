#include "sbpembed/mesh.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "sbpembed/error.hpp"

namespace sbpembed {

namespace {

Point lerp(Point a, Point b, double s) { return {(1.0 - s) * a.x + s * b.x, (1.0 - s) * a.y + s * b.y}; }

double horner(const std::vector<double>& c, double s) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
  return v;
}

// Coefficients of q(t) = p(s0 + h t).
std::vector<double> compose_affine(const std::vector<double>& c, double s0, double h) {
  std::vector<double> out;
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    std::vector<double> next(out.size() + 1, 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
      next[k] += out[k] * s0;
      next[k + 1] += out[k] * h;
    }
    next[0] += *it;
    out = std::move(next);
  }
  if (out.empty()) out.push_back(0.0);
  return out;
}

std::string where(int block, Side side) {
  std::ostringstream s;
  s << "block " << block << " side " << side_name(side);
  return s.str();
}

Point rotate_quarter(Point p, int turns) {
  for (int t = 0; t < turns; ++t) p = {-p.y, p.x};
  return p;
}

}  // namespace

std::string_view side_name(Side side) {
  switch (side) {
    case Side::South: return "s";
    case Side::East: return "e";
    case Side::North: return "n";
    case Side::West: return "w";
  }
  return "?";
}

Side parse_side(std::string_view name) {
  if (name == "s") return Side::South;
  if (name == "e") return Side::East;
  if (name == "n") return Side::North;
  if (name == "w") return Side::West;
  fail(ErrorCode::InvalidMesh, "unknown side name '" + std::string(name) + "' (expected s, e, n or w)");
}

CurvedEdge CurvedEdge::line(Point from, Point to) {
  CurvedEdge e;
  e.kind_ = Kind::Line;
  e.a_ = from;
  e.b_ = to;
  return e;
}

CurvedEdge CurvedEdge::arc(Point center, double radius, double theta0, double theta1) {
  if (!(radius > 0.0)) fail(ErrorCode::InvalidMesh, "circular arc radius must be positive");
  CurvedEdge e;
  e.kind_ = Kind::Arc;
  e.a_ = center;
  e.radius_ = radius;
  e.theta0_ = theta0;
  e.theta1_ = theta1;
  return e;
}

CurvedEdge CurvedEdge::polynomial(std::vector<double> cx, std::vector<double> cy) {
  if (cx.empty() || cy.empty()) fail(ErrorCode::InvalidMesh, "polynomial edge needs at least one coefficient per coordinate");
  CurvedEdge e;
  e.kind_ = Kind::Polynomial;
  e.cx_ = std::move(cx);
  e.cy_ = std::move(cy);
  return e;
}

Point CurvedEdge::operator()(double s) const {
  switch (kind_) {
    case Kind::Line:
      return lerp(a_, b_, s);
    case Kind::Arc: {
      const double theta = theta0_ + s * (theta1_ - theta0_);
      return {a_.x + radius_ * std::cos(theta), a_.y + radius_ * std::sin(theta)};
    }
    case Kind::Polynomial:
      return {horner(cx_, s), horner(cy_, s)};
  }
  return {};
}

CurvedEdge CurvedEdge::reversed() const {
  switch (kind_) {
    case Kind::Line: return line(b_, a_);
    case Kind::Arc: return arc(a_, radius_, theta1_, theta0_);
    case Kind::Polynomial: return sub(1.0, 0.0);
  }
  return *this;
}

CurvedEdge CurvedEdge::sub(double s0, double s1) const {
  switch (kind_) {
    case Kind::Line: return line((*this)(s0), (*this)(s1));
    case Kind::Arc:
      return arc(a_, radius_, theta0_ + s0 * (theta1_ - theta0_), theta0_ + s1 * (theta1_ - theta0_));
    case Kind::Polynomial:
      return polynomial(compose_affine(cx_, s0, s1 - s0), compose_affine(cy_, s0, s1 - s0));
  }
  return *this;
}

Point coons_patch(const Block& block, double xi, double eta) {
  if (!(xi >= 0.0 && xi <= 1.0 && eta >= 0.0 && eta <= 1.0)) {
    std::ostringstream s;
    s << "coons_patch: reference coordinates (" << xi << ", " << eta << ") outside [0, 1]^2";
    fail(ErrorCode::InvalidArgument, s.str());
  }
  const CurvedEdge& S = block.edge(Side::South);
  const CurvedEdge& E = block.edge(Side::East);
  const CurvedEdge& N = block.edge(Side::North);
  const CurvedEdge& W = block.edge(Side::West);
  const Point s = S(xi), n = N(xi), w = W(eta), e = E(eta);
  const Point sw = S.from(), se = S.to(), nw = N.from(), ne = N.to();
  const double a = 1.0 - xi, b = 1.0 - eta;
  return {b * s.x + eta * n.x + a * w.x + xi * e.x -
              (a * b * sw.x + xi * b * se.x + a * eta * nw.x + xi * eta * ne.x),
          b * s.y + eta * n.y + a * w.y + xi * e.y -
              (a * b * sw.y + xi * b * se.y + a * eta * nw.y + xi * eta * ne.y)};
}

std::vector<Point> block_grid(const Block& block, const SbpOperator1D& op) {
  const int n = op.n;
  std::vector<Point> grid(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grid[static_cast<std::size_t>(i) * n + j] = coons_patch(block, op.nodes[i], op.nodes[j]);
  return grid;
}

std::array<Block, 4> quadrisect(const Block& block) {
  const CurvedEdge& S = block.edge(Side::South);
  const CurvedEdge& E = block.edge(Side::East);
  const CurvedEdge& N = block.edge(Side::North);
  const CurvedEdge& W = block.edge(Side::West);
  const Point ms = S(0.5), me = E(0.5), mn = N(0.5), mw = W(0.5);
  const Point c = coons_patch(block, 0.5, 0.5);

  using L = CurvedEdge;
  Block sw{{S.sub(0.0, 0.5), L::line(ms, c), L::line(mw, c), W.sub(0.0, 0.5)}};
  Block se{{S.sub(0.5, 1.0), E.sub(0.0, 0.5), L::line(c, me), L::line(ms, c)}};
  Block nw{{L::line(mw, c), L::line(c, mn), N.sub(0.0, 0.5), W.sub(0.5, 1.0)}};
  Block ne{{L::line(c, me), E.sub(0.5, 1.0), N.sub(0.5, 1.0), L::line(c, mn)}};
  return {sw, se, nw, ne};
}

MultiblockMesh connect_blocks(std::vector<Block> blocks, const std::string& tag, double tol) {
  MultiblockMesh mesh;
  mesh.blocks = std::move(blocks);

  // Bucket sides by quantized midpoint, then confirm endpoints.
  const double cell = std::max(tol * 1e4, 1e-7);
  auto key = [cell](Point p) {
    const auto qx = static_cast<long long>(std::llround(p.x / cell));
    const auto qy = static_cast<long long>(std::llround(p.y / cell));
    return std::to_string(qx) + ":" + std::to_string(qy);
  };
  std::unordered_map<std::string, std::vector<BlockSide>> buckets;
  for (int b = 0; b < static_cast<int>(mesh.blocks.size()); ++b)
    for (Side side : kAllSides) buckets[key(mesh.blocks[b].edge(side)(0.5))].push_back({b, side});

  std::map<BlockSide, bool> matched;
  for (int b = 0; b < static_cast<int>(mesh.blocks.size()); ++b) {
    for (Side side : kAllSides) {
      const BlockSide here{b, side};
      if (matched[here]) continue;
      const CurvedEdge& edge = mesh.blocks[b].edge(side);
      const Point mid = edge(0.5);
      // Neighbouring cells as well, in case the midpoint straddles a cell boundary.
      for (int dx = -1; dx <= 1 && !matched[here]; ++dx) {
        for (int dy = -1; dy <= 1 && !matched[here]; ++dy) {
          auto it = buckets.find(key({mid.x + dx * cell, mid.y + dy * cell}));
          if (it == buckets.end()) continue;
          for (const BlockSide& other : it->second) {
            if (other == here || matched[other]) continue;
            const CurvedEdge& o = mesh.blocks[other.block].edge(other.side);
            if (distance(o(0.5), mid) > tol) continue;
            Orientation orient;
            if (distance(o.from(), edge.from()) <= tol && distance(o.to(), edge.to()) <= tol)
              orient = Orientation::Aligned;
            else if (distance(o.from(), edge.to()) <= tol && distance(o.to(), edge.from()) <= tol)
              orient = Orientation::Reversed;
            else
              continue;
            mesh.interfaces.push_back({here, other, orient});
            matched[here] = matched[other] = true;
            break;
          }
        }
      }
    }
  }
  for (int b = 0; b < static_cast<int>(mesh.blocks.size()); ++b)
    for (Side side : kAllSides)
      if (!matched[{b, side}]) mesh.boundary_tags[{b, side}] = tag;
  return mesh;
}

MultiblockMesh generate_circle_mesh(int refinement, const std::string& tag, double half_width) {
  if (refinement < 0) fail(ErrorCode::InvalidArgument, "generate_circle_mesh: refinement must be >= 0");
  if (!(half_width > 0.0 && half_width < 1.0 / std::numbers::sqrt2))
    fail(ErrorCode::InvalidArgument, "generate_circle_mesh: half_width must lie in (0, 1/sqrt(2))");
  const double a = half_width;
  using L = CurvedEdge;

  std::vector<Block> blocks;
  blocks.push_back(Block{{L::line({-a, -a}, {a, -a}), L::line({a, -a}, {a, a}), L::line({-a, a}, {a, a}),
                          L::line({-a, -a}, {-a, a})}});
  const double q = std::numbers::pi / 4.0;
  for (int turn = 0; turn < 4; ++turn) {
    const Point in_lo = rotate_quarter({a, -a}, turn), in_hi = rotate_quarter({a, a}, turn);
    const double t0 = -q + turn * 2.0 * q, t1 = q + turn * 2.0 * q;
    const CurvedEdge outer = L::arc({0.0, 0.0}, 1.0, t0, t1);
    blocks.push_back(Block{{L::line(in_lo, outer.from()), outer, L::line(in_hi, outer.to()), L::line(in_lo, in_hi)}});
  }

  for (int level = 0; level < refinement; ++level) {
    std::vector<Block> next;
    next.reserve(blocks.size() * 4);
    for (const Block& b : blocks)
      for (Block& child : quadrisect(b)) next.push_back(std::move(child));
    blocks = std::move(next);
  }
  return connect_blocks(std::move(blocks), tag);
}

MultiblockMesh generate_rectangle_mesh(int nx, int ny, Point lower, Point upper, const std::string& tag) {
  if (nx < 1 || ny < 1) fail(ErrorCode::InvalidArgument, "generate_rectangle_mesh: need at least one block per direction");
  std::vector<Block> blocks;
  auto at = [&](int i, int j) {
    return Point{lower.x + (upper.x - lower.x) * i / nx, lower.y + (upper.y - lower.y) * j / ny};
  };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      blocks.push_back(Block{{CurvedEdge::line(at(i, j), at(i + 1, j)), CurvedEdge::line(at(i + 1, j), at(i + 1, j + 1)),
                              CurvedEdge::line(at(i, j + 1), at(i + 1, j + 1)), CurvedEdge::line(at(i, j), at(i, j + 1))}});
  return connect_blocks(std::move(blocks), tag);
}

Block quarter_annulus_block(double r_inner, double r_outer) {
  const double h = std::numbers::pi / 2.0;
  return Block{{CurvedEdge::arc({0, 0}, r_inner, h, 0.0), CurvedEdge::line({r_inner, 0.0}, {r_outer, 0.0}),
                CurvedEdge::arc({0, 0}, r_outer, h, 0.0), CurvedEdge::line({0.0, r_inner}, {0.0, r_outer})}};
}

std::vector<std::string> validate_mesh(const MultiblockMesh& mesh) {
  std::vector<std::string> out;
  const int nb = static_cast<int>(mesh.blocks.size());
  constexpr double kCornerTol = 1e-12;
  constexpr double kInterfaceTol = 1e-10;

  for (int b = 0; b < nb; ++b) {
    const Block& blk = mesh.blocks[b];
    const auto& S = blk.edge(Side::South);
    const auto& E = blk.edge(Side::East);
    const auto& N = blk.edge(Side::North);
    const auto& W = blk.edge(Side::West);
    auto corner = [&](Point p, Point q, const char* name) {
      if (distance(p, q) > kCornerTol)
        out.push_back("block " + std::to_string(b) + ": edges do not close at the " + name + " corner");
    };
    corner(S.from(), W.from(), "south-west");
    corner(S.to(), E.from(), "south-east");
    corner(N.to(), E.to(), "north-east");
    corner(N.from(), W.to(), "north-west");

    for (Side side : kAllSides) {
      // Injectivity: positive chords and no reversal of direction.
      const CurvedEdge& e = blk.edge(side);
      constexpr int kSamples = 32;
      Point prev = e(0.0);
      double px = 0.0, py = 0.0;
      for (int k = 1; k <= kSamples; ++k) {
        const Point cur = e(static_cast<double>(k) / kSamples);
        const double dx = cur.x - prev.x, dy = cur.y - prev.y;
        if (std::hypot(dx, dy) <= 0.0 || (k > 1 && dx * px + dy * py <= 0.0)) {
          out.push_back(where(b, side) + ": edge parametrization is not injective");
          break;
        }
        px = dx;
        py = dy;
        prev = cur;
      }
    }
  }

  std::map<BlockSide, int> uses;
  for (std::size_t k = 0; k < mesh.interfaces.size(); ++k) {
    const Interface& f = mesh.interfaces[k];
    bool refs_ok = true;
    for (const BlockSide& bs : {f.a, f.b}) {
      if (bs.block < 0 || bs.block >= nb) {
        out.push_back("interface " + std::to_string(k) + ": dangling reference to block " + std::to_string(bs.block));
        refs_ok = false;
      } else {
        ++uses[bs];
      }
    }
    if (!refs_ok) continue;
    if (f.a == f.b) {
      out.push_back("interface " + std::to_string(k) + ": " + where(f.a.block, f.a.side) + " is paired with itself");
      continue;
    }
    const CurvedEdge& ea = mesh.blocks[f.a.block].edge(f.a.side);
    const CurvedEdge& eb = mesh.blocks[f.b.block].edge(f.b.side);
    double worst = 0.0;
    constexpr int kChecks = 17;
    for (int k2 = 0; k2 < kChecks; ++k2) {
      const double s = static_cast<double>(k2) / (kChecks - 1);
      const double sb = f.orientation == Orientation::Aligned ? s : 1.0 - s;
      worst = std::max(worst, distance(ea(s), eb(sb)));
    }
    if (worst > kInterfaceTol) {
      std::ostringstream s;
      s << "interface " << k << ": geometric mismatch between " << where(f.a.block, f.a.side) << " and "
        << where(f.b.block, f.b.side) << " (max distance " << worst << ")";
      out.push_back(s.str());
    }
  }

  for (const auto& [bs, tag] : mesh.boundary_tags) {
    if (bs.block < 0 || bs.block >= nb) {
      out.push_back("boundary tag '" + tag + "' refers to missing block " + std::to_string(bs.block));
      continue;
    }
    if (tag.empty()) out.push_back(where(bs.block, bs.side) + ": empty boundary tag");
  }

  for (int b = 0; b < nb; ++b) {
    for (Side side : kAllSides) {
      const BlockSide bs{b, side};
      const int in_interfaces = uses.count(bs) ? uses.at(bs) : 0;
      const bool tagged = mesh.boundary_tags.count(bs) > 0;
      if (in_interfaces > 1)
        out.push_back(where(b, side) + ": appears in " + std::to_string(in_interfaces) + " interfaces");
      if (in_interfaces >= 1 && tagged) out.push_back(where(b, side) + ": is both an interface and a tagged boundary");
      if (in_interfaces == 0 && !tagged) out.push_back(where(b, side) + ": neither an interface nor a tagged boundary");
    }
  }
  return out;
}

}  // namespace sbpembed
