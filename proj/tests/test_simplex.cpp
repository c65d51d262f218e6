#include <cmath>
#include <limits>

#include "doctest.h"

#include "riskrule/errors.hpp"
#include "riskrule/simplex.hpp"
#include "support.hpp"

using namespace riskrule;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LinearProgram make(Vector c, Matrix A, std::vector<RowSense> s, Vector b) {
  LinearProgram lp;
  lp.cost = std::move(c);
  lp.A = std::move(A);
  lp.sense = std::move(s);
  lp.rhs = std::move(b);
  return lp;
}

}  // namespace

TEST_CASE("one-variable programs") {
  auto lp = make(Vector::Ones(1), Matrix::Ones(1, 1), {RowSense::kGreaterEqual},
                 Vector::Constant(1, 3.0));
  auto sol = solve_lp(lp);
  CHECK(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(3.0));

  lp = make(Vector::Ones(2), Matrix::Ones(1, 2), {RowSense::kGreaterEqual}, Vector::Ones(1));
  sol = solve_lp(lp);
  CHECK(sol.objective == doctest::Approx(1.0));
}

TEST_CASE("infeasible and unbounded") {
  auto lp = make(Vector::Ones(1), Matrix::Ones(2, 1), {RowSense::kLessEqual, RowSense::kGreaterEqual},
                 (Vector(2) << 1.0, 2.0).finished());
  CHECK(solve_lp(lp).status == LpStatus::kInfeasible);
  lp = make(-Vector::Ones(1), Matrix::Ones(1, 1), {RowSense::kGreaterEqual}, Vector::Ones(1));
  CHECK(solve_lp(lp).status == LpStatus::kUnbounded);
}

TEST_CASE("free and boxed variables") {
  // min |x - 2| style: min t s.t. t >= x - 2, t >= 2 - x, x free, x in [-inf, 1]
  LinearProgram lp = make((Vector(2) << 0.0, 1.0).finished(),
                          (Matrix(2, 2) << -1.0, 1.0, 1.0, 1.0).finished(),
                          {RowSense::kGreaterEqual, RowSense::kGreaterEqual},
                          (Vector(2) << -2.0, 2.0).finished());
  lp.lower = (Vector(2) << -kInf, 0.0).finished();
  lp.upper = (Vector(2) << 1.0, kInf).finished();
  auto sol = solve_lp(lp);
  CHECK(sol.status == LpStatus::kOptimal);
  CHECK(sol.x[0] == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(1.0));
  lp.lower[0] = -5.0;
  lp.upper[0] = -3.0;
  sol = solve_lp(lp);
  CHECK(sol.objective == doctest::Approx(5.0));
  lp.lower[0] = 2.0;
  CHECK(solve_lp(lp).status == LpStatus::kInfeasible);
}

TEST_CASE("equality rows and redundancy") {
  auto lp = make((Vector(3) << 1.0, 2.0, 3.0).finished(),
                 (Matrix(3, 3) << 1, 1, 1, 2, 2, 2, 1, 0, -1).finished(),
                 {RowSense::kEqual, RowSense::kEqual, RowSense::kEqual},
                 (Vector(3) << 1.0, 2.0, 0.0).finished());
  const auto sol = solve_lp(lp);
  CHECK(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(2.0));
}

TEST_CASE("random programs against vertex enumeration") {
  Rng rng(41);
  int solved = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(4));
    const int m = 1 + static_cast<int>(rng.below(6));
    LinearProgram lp;
    lp.cost = Vector::NullaryExpr(n, [&] { return rng.uniform(-1.0, 1.0); });
    lp.A = Matrix::NullaryExpr(m + 1, n, [&] { return std::round(rng.uniform(-3.0, 3.0)); });
    lp.rhs = Vector::NullaryExpr(m + 1, [&] { return std::round(rng.uniform(-4.0, 6.0)); });
    lp.sense.resize(static_cast<std::size_t>(m + 1));
    for (int i = 0; i < m; ++i) {
      const auto k = rng.below(3);
      lp.sense[i] = k == 0 ? RowSense::kLessEqual : k == 1 ? RowSense::kGreaterEqual : RowSense::kEqual;
    }
    // Bounded region.
    lp.A.row(m).setOnes();
    lp.rhs[m] = 10.0;
    lp.sense[m] = RowSense::kLessEqual;
    const double oracle = testing::vertex_lp_min(lp);
    const auto sol = solve_lp(lp);
    if (std::isinf(oracle)) {
      CHECK(sol.status == LpStatus::kInfeasible);
      continue;
    }
    REQUIRE(sol.status == LpStatus::kOptimal);
    CHECK(std::abs(sol.objective - oracle) < 1e-8);
    ++solved;
  }
  CHECK(solved > 50);
}

TEST_CASE("separation examples") {
  MarginSpec spec{0.5, 1.0};
  const std::vector<Vector> pts{Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};
  const std::vector<std::uint8_t> labels{0, 1};
  const auto res = l1_separation(pts, labels, spec);
  CHECK(res.status == LpStatus::kOptimal);
  CHECK(res.l1_norm == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(res.B_row[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(res.offset) < 1e-12);

  const std::vector<std::uint8_t> ones{1, 1};
  const auto pure = l1_separation(pts, ones, MarginSpec{});
  CHECK(pure.B_row.isZero());
  CHECK(pure.offset == 0.001);
  const std::vector<std::uint8_t> zeros{0, 0};
  CHECK(l1_separation(pts, zeros, MarginSpec{}).offset == -0.001);

  // Same point, both labels.
  const std::vector<Vector> dup{Vector::Zero(2), Vector::Zero(2)};
  CHECK(l1_separation(dup, labels, MarginSpec{}).status == LpStatus::kInfeasible);
}

TEST_CASE("separation against the hyperplane oracle") {
  Rng rng(43);
  for (int trial = 0; trial < 60; ++trial) {
    const int r = 1 + static_cast<int>(rng.below(4));
    const int n = 2 + static_cast<int>(rng.below(4));
    std::vector<Vector> pts;
    std::vector<std::uint8_t> labels;
    for (int w = 0; w < n; ++w) {
      pts.push_back(Vector::NullaryExpr(r, [&] { return rng.uniform(-1.0, 1.0); }));
      labels.push_back(w == 0 ? 0 : w == 1 ? 1 : static_cast<std::uint8_t>(rng.below(2)));
    }
    const MarginSpec spec{0.05, rng.uniform(0.2, 3.0)};
    const auto res = l1_separation(pts, labels, spec);
    const double oracle = testing::l1_separation_oracle(pts, labels, spec);
    if (std::isinf(oracle)) {
      CHECK(res.status == LpStatus::kInfeasible);
      continue;
    }
    REQUIRE(res.status == LpStatus::kOptimal);
    CHECK(std::abs(res.l1_norm - oracle) < 1e-8);
    for (int w = 0; w < n; ++w) {
      const double g = res.B_row.dot(pts[w]) + res.offset;
      const double a = labels[w] ? g : -g;
      CHECK(a >= spec.epsilon - 1e-9);
      CHECK(a <= spec.delta + 1e-9);
    }
  }
}

TEST_CASE("joint scaling of the margin scales the norm") {
  Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const int r = 3;
    std::vector<Vector> pts;
    std::vector<std::uint8_t> labels;
    for (int w = 0; w < 4; ++w) {
      pts.push_back(Vector::NullaryExpr(r, [&] { return rng.uniform(-1.0, 1.0); }));
      labels.push_back(static_cast<std::uint8_t>(w % 2));
    }
    const auto a = l1_separation(pts, labels, MarginSpec{0.01, 100.0});
    const auto b = l1_separation(pts, labels, MarginSpec{0.02, 200.0});
    if (a.status != LpStatus::kOptimal) continue;
    CHECK(b.l1_norm == doctest::Approx(2.0 * a.l1_norm).epsilon(1e-8));
  }
}
