#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sbpembed/error.hpp"
#include "sbpembed/geometry.hpp"

using namespace sbpembed;

namespace {

constexpr double kPi = std::numbers::pi;

Block parallelogram() {
  // x = 2 xi + 0.5 eta, y = 0.25 xi + 1.5 eta
  const Point o{0, 0}, a{2, 0.25}, b{0.5, 1.5}, c{2.5, 1.75};
  return Block{{CurvedEdge::line(o, a), CurvedEdge::line(a, c), CurvedEdge::line(b, c), CurvedEdge::line(o, b)}};
}

Vec coord(const BlockOperators& ops, const Block& blk, const SbpOperator1D& op, bool want_x) {
  const auto pts = block_grid(blk, op);
  Vec v(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) v[i] = want_x ? pts[i].x : pts[i].y;
  (void)ops;
  return v;
}

// Green identity residual from dense matrices, written out independently.
double dense_green(const BlockOperators& b, const Vec& u, const Vec& v) {
  const Mat H = b.H.asDiagonal();
  const Mat DL = Mat(b.D_L), Dx = Mat(b.Dx), Dy = Mat(b.Dy);
  double boundary = 0.0;
  for (const SideOperators& s : b.sides) {
    const Mat d = Mat(s.d);
    for (std::size_t k = 0; k < s.nodes.size(); ++k) boundary += u[s.nodes[k]] * s.H[k] * (d.row(k) * v)(0);
  }
  const double lap = u.dot(H * (DL * v));
  const double grad = (Dx * u).dot(H * (Dx * v)) + (Dy * u).dot(H * (Dy * v));
  const double scale = 1.0 + std::max({std::abs(lap), std::abs(grad), std::abs(boundary)});
  return std::abs(lap + grad - boundary) / scale;
}

}  // namespace

TEST_CASE("tensor operators and side ordering") {
  const SbpOperator1D op = make_sbp_operator(3);
  const TensorOperators t = tensor_operators(op);
  const int n = op.n;
  CHECK(t.nodes(Side::West)[1] == 1);
  CHECK(t.nodes(Side::East)[1] == (n - 1) * n + 1);
  CHECK(t.nodes(Side::South)[1] == n);
  CHECK(t.nodes(Side::North)[1] == n + n - 1);
  // D_xi differentiates along the slow index.
  Vec f(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f[i * n + j] = op.nodes[i];
  CHECK((t.D_xi * f - Vec::Ones(n * n)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((t.D_eta * f).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("affine metric is constant and exact") {
  const SbpOperator1D op = make_sbp_operator(5);
  const Block blk = parallelogram();
  const BlockOperators b = block_operators(op, blk);
  CHECK((b.metric.J.array() - 2.875).abs().maxCoeff() < 1e-13);
  CHECK((b.metric.x_xi.array() - 2.0).abs().maxCoeff() < 1e-13);
  CHECK((b.metric.y_eta.array() - 1.5).abs().maxCoeff() < 1e-13);
  CHECK(b.H.sum() == doctest::Approx(2.875).epsilon(1e-13));
  // alpha1 = x_eta^2 + y_eta^2 over J.
  CHECK((b.metric.alpha1.array() - (0.25 + 2.25) / 2.875).abs().maxCoeff() < 1e-13);

  const Vec x = coord(b, blk, op, true), y = coord(b, blk, op, false);
  const Vec r2 = x.cwiseProduct(x) + y.cwiseProduct(y);
  CHECK((b.D_L * r2 - 4.0 * Vec::Ones(r2.size())).cwiseAbs().maxCoeff() < 1e-10);
  const Vec xy = x.cwiseProduct(y);
  CHECK((b.Dx * xy - y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b.Dy * xy - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("quarter annulus Jacobian approaches (pi/2)(1 + eta)") {
  double previous = 1.0;
  for (int p : {5, 9, 13}) {
    const SbpOperator1D op = make_sbp_operator(p);
    const BlockOperators b = block_operators(op, quarter_annulus_block());
    double err = 0.0;
    for (int i = 0; i < op.n; ++i)
      for (int j = 0; j < op.n; ++j)
        err = std::max(err, std::abs(b.metric.J[i * op.n + j] - kPi / 2 * (1 + op.nodes[j])));
    CAPTURE(p);
    CHECK(err < previous);
    previous = err;
  }
  CHECK(previous < 1e-8);
  const BlockOperators b = block_operators(make_sbp_operator(13), quarter_annulus_block());
  CHECK(b.H.sum() == doctest::Approx(3 * kPi / 4).epsilon(1e-10));
}

TEST_CASE("derivatives of coordinates are exact on curved blocks") {
  const SbpOperator1D op = make_sbp_operator(5);
  const Block blk = quarter_annulus_block();
  const BlockOperators b = block_operators(op, blk);
  const Vec x = coord(b, blk, op, true), y = coord(b, blk, op, false);
  const Vec one = Vec::Ones(x.size());
  CHECK((b.Dx * x - one).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b.Dy * y - one).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b.Dx * y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b.Dy * x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normals point outward") {
  const SbpOperator1D op = make_sbp_operator(9);
  const Block blk = quarter_annulus_block();
  const BlockOperators b = block_operators(op, blk);
  const auto pts = block_grid(blk, op);
  // Inner arc: inward radial; outer arc: outward radial; straight sides axis aligned.
  const SideOperators& s = b.side(Side::South);
  const SideOperators& nn = b.side(Side::North);
  for (int k = 0; k < op.n; ++k) {
    const Point p = pts[s.nodes[k]], q = pts[nn.nodes[k]];
    const double rp = std::hypot(p.x, p.y), rq = std::hypot(q.x, q.y);
    CHECK(s.nx[k] == doctest::Approx(-p.x / rp).epsilon(1e-6));
    CHECK(s.ny[k] == doctest::Approx(-p.y / rp).epsilon(1e-6));
    CHECK(nn.nx[k] == doctest::Approx(q.x / rq).epsilon(1e-6));
    CHECK(nn.ny[k] == doctest::Approx(q.y / rq).epsilon(1e-6));
  }
  // West side sits on the y axis (xi = 0, angle pi/2): outward is -x.
  // East side is on the x axis: outward is -y.
  for (int k = 0; k < op.n; ++k) {
    CHECK(b.side(Side::West).nx[k] == doctest::Approx(-1.0));
    CHECK(b.side(Side::East).ny[k] == doctest::Approx(-1.0));
  }
  // Boundary quadrature integrates side length.
  CHECK(s.H.sum() == doctest::Approx(kPi / 2).epsilon(1e-8));
  CHECK(nn.H.sum() == doctest::Approx(kPi).epsilon(1e-8));
  CHECK(b.side(Side::West).H.sum() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("per-block Green identity on random pairs") {
  std::mt19937_64 rng(11);
  for (int p : {5, 7, 9}) {
    const SbpOperator1D op = make_sbp_operator(p);
    for (const Block& blk : {generate_rectangle_mesh(1, 1, {0, 0}, {1, 1}).blocks[0], parallelogram(),
                             quarter_annulus_block()}) {
      const BlockOperators b = block_operators(op, blk);
      double worst = 0.0, worst_lib = 0.0;
      for (int k = 0; k < 100; ++k) {
        const Vec u = oracle::random_vector(rng, op.n * op.n), v = oracle::random_vector(rng, op.n * op.n);
        worst = std::max(worst, dense_green(b, u, v));
        worst_lib = std::max(worst_lib, green_residual_block(b, u, v));
      }
      CHECK(worst <= 1e-10);
      CHECK(worst_lib <= 1e-10);
    }
  }
}

TEST_CASE("Green identity is sensitive to a broken operator") {
  const SbpOperator1D op = make_sbp_operator(5);
  BlockOperators b = block_operators(op, quarter_annulus_block());
  b.H[7] *= 1.0 + 1e-6;
  std::mt19937_64 rng(5);
  const Vec u = oracle::random_vector(rng, op.n * op.n), v = oracle::random_vector(rng, op.n * op.n);
  CHECK(green_residual_block(b, u, v) > 1e-9);
}

TEST_CASE("disc area at refinement 2") {
  const SbpOperator1D op = make_sbp_operator(5);
  const MultiblockMesh m = generate_circle_mesh(2);
  double area = 0.0;
  for (const Block& blk : m.blocks) area += block_operators(op, blk).H.sum();
  CHECK(std::abs(area - kPi) <= 1e-6);
}

TEST_CASE("inverted mapping is rejected") {
  const SbpOperator1D op = make_sbp_operator(3);
  Block blk = generate_rectangle_mesh(1, 1, {0, 0}, {1, 1}).blocks[0];
  // Mirror in x: keeps corners closed but flips orientation.
  for (auto& e : blk.edges) e = CurvedEdge::line({-e.from().x, e.from().y}, {-e.to().x, e.to().y});
  try {
    block_operators(op, blk, 3);
    FAIL("expected InvalidMapping");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidMapping);
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}
