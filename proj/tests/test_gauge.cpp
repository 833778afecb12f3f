#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "kgmp/asymptotics.hpp"
#include "kgmp/gauge.hpp"
#include "oracles.hpp"

using namespace kgmp;
using doctest::Approx;

namespace {

Params charged(int n, double q, double m1) {
  Params params;
  params.n = n;
  params.p = params.critical_exponent();
  params.q = q;
  params.m1 = m1;
  return params;
}

}  // namespace

TEST_CASE("solve_gauge on constants") {
  const auto grid = build_grid(Geometry::sphere(3), 200);
  const Params params = charged(3, 1, 1);
  const auto zero = solve_gauge(grid, params, Fieldd::Zero(grid.size()));
  CHECK(zero.v.cwiseAbs().maxCoeff() == 0.0);
  const auto one = solve_gauge(grid, params, Fieldd::Ones(grid.size()));
  CHECK((one.v.array() - 0.5).abs().maxCoeff() < 1e-12);

  for (double c : {0.1, 0.7, 3.0, 20.0})
    for (double q : {0.5, 2.0})
      for (double m1 : {0.3, 1.5}) {
        const auto g = solve_gauge(grid, charged(3, q, m1), Fieldd::Constant(grid.size(), c));
        const double exact = q * c * c / (m1 * m1 + q * q * c * c);
        CHECK((g.v.array() - exact).abs().maxCoeff() < 1e-12);
      }
}

TEST_CASE("gauge of a concentrated bubble on S^5 sits in (1/2, 1) at the pole") {
  const Params params = charged(5, 1, 1);
  const auto grid = build_grid(Geometry::sphere(5), 20000, 2.0);
  double previous = 0;
  for (double mu : {1e-2, 1e-3, 1e-4}) {
    const auto g = solve_gauge(grid, params, bubble(grid, BubbleSpec{mu, 5}));
    CHECK(g.v[0] > 0.5);
    CHECK(g.v[0] < 1.0);
    CHECK(g.v[0] > previous);
    previous = g.v[0];
  }
}

TEST_CASE("bounds, symmetry and the complementary maximum principle on random fields") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 3 + 2 * (trial % 3);
    const double q = trial % 4 == 0 ? 0.5 : trial % 4 == 1 ? 1.0 : trial % 4 == 2 ? 2.0 : 5.0;
    const double m1 = 0.2 + (trial % 5) * 0.5;
    const Params params = charged(n, q, m1);
    const auto grid = build_grid(Geometry::sphere(n), 300, 1.0 + 0.02 * trial);
    const Fieldd u = oracle::smooth_field(grid.nodes, grid.geometry.r_max, rng);
    const auto g = solve_gauge(grid, params, u);
    CHECK(g.min_v >= -1e-10);
    CHECK(g.max_v <= 1 / q + 1e-10);
    CHECK(g.bound_violation <= 1e-10);

    const auto mirrored = solve_gauge(grid, params, (-u).eval());
    CHECK((mirrored.v - g.v).cwiseAbs().maxCoeff() == 0.0);

    // w = 1/q - v solves the same operator with right-hand side m1²/q > 0.
    const Fieldd w = (1 / q - g.v.array()).matrix();
    CHECK(w.minCoeff() >= -1e-12);
    const auto op = assemble(grid, (m1 * m1 + q * q * u.array().square()).matrix().eval());
    const Fieldd row_scale = op.diag().cwiseAbs() + op.sub().cwiseAbs() + op.super().cwiseAbs();
    const Fieldd residual = (apply(op, w).array() - m1 * m1 / q).matrix();
    CHECK((residual.array() / row_scale.array()).abs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("non-finite input is a domain error") {
  const auto grid = build_grid(Geometry::sphere(3), 20);
  Fieldd u = Fieldd::Ones(grid.size());
  u[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_gauge(grid, charged(3, 1, 1), u), DomainError);
  CHECK_THROWS_AS(solve_gauge(grid, charged(3, 1, 1), Fieldd::Ones(4)), GridMismatch);
}

TEST_CASE("truncation sequence") {
  const Params params = charged(5, 1, 1);
  const auto grid = build_grid(Geometry::sphere(5), 2000, 2.0);
  std::vector<double> lambdas;
  for (int k = 0; k <= 10; ++k) lambdas.push_back(std::ldexp(1.0, k));

  SUBCASE("bubble B_0.05 on S^5") {
    const Fieldd u = bubble(grid, BubbleSpec{0.05, 5});
    const double peak = u.cwiseAbs().maxCoeff();
    const auto steps = truncation_sequence(grid, params, u, lambdas);
    REQUIRE(steps.size() == lambdas.size());
    for (std::size_t k = 1; k < steps.size(); ++k) {
      if (steps[k - 1].lambda < peak)
        CHECK(steps[k].h1_delta_to_final < steps[k - 1].h1_delta_to_final);
      else
        CHECK(steps[k].h1_delta_to_final <= steps[k - 1].h1_delta_to_final + 1e-12);
    }
    CHECK(steps.back().h1_delta_to_final <= 1e-8);
  }
  SUBCASE("inactive truncation reproduces the direct solve") {
    const Fieldd u = -0.5 * bubble(grid, BubbleSpec{0.3, 5});
    const double peak = u.cwiseAbs().maxCoeff();
    const auto steps = truncation_sequence(grid, params, u, lambdas);
    const Fieldd direct = solve_gauge(grid, params, u).v;
    for (const auto& step : steps)
      if (step.lambda >= peak) {
        CHECK(step.h1_delta_to_final <= 1e-10);
        CHECK((step.phi - direct).cwiseAbs().maxCoeff() <= 1e-12);
      }
  }
  SUBCASE("zero field") {
    for (const auto& step : truncation_sequence(grid, params, Fieldd::Zero(grid.size()).eval(), lambdas))
      CHECK(step.phi.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("levels must increase") {
    CHECK_THROWS_AS(truncation_sequence(grid, params, Fieldd::Ones(grid.size()).eval(), {2.0, 1.0}),
                    DomainError);
    CHECK_THROWS_AS(truncation_sequence(grid, params, Fieldd::Ones(grid.size()).eval(), {-1.0}), DomainError);
  }
}

TEST_CASE("continuity inequality") {
  SUBCASE("identical fields") {
    const auto grid = build_grid(Geometry::sphere(3), 100);
    const Fieldd u = Fieldd::Ones(grid.size());
    const auto check = continuity_check(grid, charged(3, 1, 1), u, u);
    CHECK(check.lhs == 0.0);
    CHECK(check.rhs == 0.0);
    CHECK(check.holds());
  }
  SUBCASE("constants: both sides in closed form") {
    const auto grid = build_grid(Geometry::sphere(3), 200);
    const auto check =
        continuity_check(grid, charged(3, 1, 1), Fieldd::Ones(grid.size()), Fieldd::Zero(grid.size()));
    const double vol = grid.volume();
    CHECK(check.lhs == Approx(vol * 0.25).epsilon(1e-12));
    CHECK(check.rhs == Approx(vol).epsilon(1e-12));
    CHECK(check.holds());
  }
  SUBCASE("random pairs") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 3 + trial % 5;
      const double m1 = 0.25 + 0.25 * (trial % 7);
      const double q = 0.5 + 0.5 * (trial % 4);
      const auto grid = build_grid(Geometry::sphere(n), 250);
      const Fieldd u1 = oracle::smooth_field(grid.nodes, grid.geometry.r_max, rng);
      const Fieldd u2 = oracle::smooth_field(grid.nodes, grid.geometry.r_max, rng);
      const auto check = continuity_check(grid, charged(n, q, m1), u1, u2);
      CHECK(check.lhs <= check.rhs * (1 + 1e-8));
    }
  }
}
