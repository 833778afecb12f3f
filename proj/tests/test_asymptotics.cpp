#include <cmath>

#include "doctest.h"
#include "kgmp/asymptotics.hpp"
#include "kgmp/mountainpass.hpp"
#include "oracles.hpp"

using namespace kgmp;
using doctest::Approx;

namespace {

Params unit_charge(int n) { return Params::critical(n, 1, 1, 1, 0); }

}  // namespace

TEST_CASE("bubbles") {
  for (int n : {3, 5, 7}) {
    for (double mu : {1.0, 0.1, 1e-3}) {
      CHECK(bubble_value(n, mu, 0.0) == Approx(std::pow(mu, -(n - 2) / 2.0)).epsilon(1e-14));
      for (double r : {1e-4, 0.01, 0.5, 2.0}) {
        const double rescaled = std::pow(mu, -(n - 2) / 2.0) * limit_profile(n, r / mu);
        CHECK(bubble_value(n, mu, r) == Approx(rescaled).epsilon(1e-13));
      }
    }
  }
  const auto grid = build_grid(Geometry::sphere(5), 400, 2.0);
  const Fieldd b = bubble(grid, BubbleSpec{0.05, 5});
  for (Eigen::Index i = 0; i + 1 < grid.size(); ++i) CHECK(b[i + 1] < b[i]);
  CHECK_THROWS_AS(bubble(grid, BubbleSpec{0.0, 5}), DomainError);
  CHECK(limit_profile(5, 0.0) == 1.0);
}

TEST_CASE("sphere_solution family") {
  const double beta = 1.5;
  const auto grid = build_grid(Geometry::sphere(5), 400);
  const Fieldd u = sphere_solution(grid, beta);
  CHECK(u[0] == Approx(std::pow(3.75 * (beta * beta - 1), 0.75) * std::pow(beta - 1, -1.5)).epsilon(1e-14));
  CHECK(u.minCoeff() > 0);

  // Discrete residual of Δu + 15/4 u = u^(7/3) is second order.
  double previous = 0;
  for (int N : {200, 400, 800}) {
    const auto g = build_grid(Geometry::sphere(5), N);
    const Fieldd w = sphere_solution(g, beta);
    Fieldd residual = assemble_laplacian(g).laplacian(w);
    residual.array() += 3.75 * w.array() - w.array().pow(7.0 / 3.0);
    const double error = residual.cwiseAbs().maxCoeff();
    if (previous > 0) CHECK(previous / error > 3.5);
    previous = error;
  }

  CHECK_THROWS_AS(sphere_solution(grid, 1.0), DomainError);
  CHECK_THROWS_AS(sphere_solution(grid, 0.5), DomainError);
  CHECK_THROWS_AS(sphere_solution(build_grid(Geometry::ball(5, 1.0), 50), 1.5), DomainError);

  // Conformal invariance: ∫u^(2*) does not depend on β.
  const auto fine = build_grid(Geometry::sphere(5), 4000, 2.0);
  auto critical_mass = [&](double b) {
    return integrate(fine, sphere_solution(fine, b).array().pow(10.0 / 3.0).matrix().eval());
  };
  CHECK(std::abs(critical_mass(1.5) / critical_mass(1.2) - 1) <= 1e-2);
}

TEST_CASE("concentration scale and its inverse") {
  for (double mu : {0.3, 0.1, 1e-2, 1e-3}) {
    const double beta = sphere_beta_for_scale(5, mu);
    const double a = 4 / (15 * mu * mu);
    CHECK(beta == Approx((a + 1) / (a - 1)).epsilon(1e-15));
    const auto grid = build_grid(Geometry::sphere(5), 50);
    CHECK(concentration_scale(5, sphere_solution(grid, beta)[0]) == Approx(mu).epsilon(1e-10));
  }
  CHECK_THROWS_AS(sphere_beta_for_scale(5, 1.0), DomainError);
  CHECK_THROWS_AS(sphere_beta_for_scale(5, -1e-2), DomainError);
}

TEST_CASE("phase-compensation ratio") {
  for (const auto& ref : oracle::phase_ratios) {
    const auto report = phase_ratio(unit_charge(ref.n), ref.mu, 20000);
    CHECK(report.ratio == Approx(ref.ratio).epsilon(1e-5));
    CHECK(report.ratio > 0);
    CHECK(report.ratio < 1);
    CHECK_FALSE(report.under_resolved);
  }
  // n = 3 decays towards 0 as μ shrinks.
  CHECK(phase_ratio(unit_charge(3), 1e-2, 20000).ratio < phase_ratio(unit_charge(3), 1e-1, 20000).ratio);

  const auto coarse = phase_ratio(unit_charge(5), 1e-3, 200);
  CHECK(coarse.under_resolved);
  CHECK(coarse.warning.find("under-resolved") != std::string::npos);
  CHECK_THROWS_AS(phase_ratio(unit_charge(5), 0.0, 200), DomainError);
}

TEST_CASE("rescaled gauge profile") {
  const Params params = unit_charge(5);
  const std::vector<double> xs{0, 0.5, 1, 2, 5, 10, 50};
  const auto values = rescaled_gauge_profile(params, 1e-2, xs);
  REQUIRE(values.size() == xs.size());
  for (double value : values) {
    CHECK(value >= 0);
    CHECK(value <= 1 / params.q);
  }
  for (std::size_t k = 1; k < values.size(); ++k) CHECK(values[k] <= values[k - 1] + 1e-12);
  CHECK_THROWS_AS(rescaled_gauge_profile(params, 1e-2, std::vector<double>{1e6}), DomainError);
}

TEST_CASE("Pohozaev vector field") {
  const Geometry sphere = Geometry::sphere(5);
  double previous = 0;
  for (double r : {0.1, 0.05, 0.025}) {
    const double deviation = std::abs(pohozaev_field(sphere, r).div - 5);
    if (previous > 0) CHECK(previous / deviation == Approx(4.0).epsilon(0.02));
    previous = deviation;
  }
  const auto flat = pohozaev_field(Geometry::ball(5, 1.0), 0.3);
  CHECK(flat.div == 5.0);
  CHECK(flat.a == 0.3);
}

TEST_CASE("Pohozaev terms for the concentrating family") {
  const Params params = Params::critical(5, std::sqrt(3.75), 1, 1, 0);
  const auto grid = build_grid(Geometry::sphere(5), 4000, 2.0);
  const double mu = 1e-2;
  const Fieldd u = sphere_solution(grid, sphere_beta_for_scale(5, mu));
  const Fieldd v = solve_gauge(grid, params, u).v;
  const auto report = pohozaev_terms(grid, params, u, v, 1.0);
  const double c5 = oracle::c5_profile_mass;
  const double ratio = report.lhs_mass / (-c5 * mu * mu);
  CHECK(ratio >= 0.8);
  CHECK(ratio <= 1.2);
  CHECK(report.subcritical_term == Approx(0.0).epsilon(1e-12));
  CHECK(report.r0 == Approx(1.0).epsilon(1e-3));
  CHECK_FALSE(report.note.empty());
  CHECK_THROWS_AS(pohozaev_terms(grid, params, u, v, 0.0), DomainError);
  CHECK_THROWS_AS(pohozaev_terms(grid, params, u, v, 4.0), DomainError);
}

TEST_CASE("Pohozaev balance converges for a Newton-refined pair") {
  // Subcritical S^3 model where the mountain-pass solution is not constant.
  const Params params{3, 4, 1.5, 1, 1, 0.5};
  double previous = 0;
  for (int N : {200, 400, 800}) {
    const auto grid = build_grid(Geometry::sphere(3), N);
    const auto solution = mountain_pass(grid, params, default_seed(grid));
    REQUIRE(solution.accepted());
    CHECK(solution.max_u - solution.min_u > 1);
    const double residual = pohozaev_terms(grid, params, solution.u, solution.v, 1.0).balance_residual;
    if (previous > 0) CHECK(previous / residual >= 3);
    previous = residual;
  }
}

TEST_CASE("profile mass and K-tilde") {
  CHECK(profile_l2_mass(5) == Approx(oracle::c5_profile_mass).epsilon(1e-8));
  CHECK_THROWS_AS(profile_l2_mass(4), DomainError);
  CHECK(default_k_tilde(Geometry::sphere(5)) == Approx(4.125).epsilon(1e-10));
  CHECK(default_k_tilde(Geometry::ball(5, 1.0)) == 1.0);
  CHECK_THROWS_AS(default_k_tilde(Geometry::sphere(3)), DomainError);
}

TEST_CASE("h-check potential") {
  const auto grid = build_grid(Geometry::sphere(5), 400, 1.5);
  const double k_tilde = 4.125;
  for (double c : {1e-3, 0.5, 2.0}) {
    const Fieldd h = hcheck_potential(grid, Fieldd::Constant(grid.size(), c).eval(), k_tilde);
    CHECK((h.array() == k_tilde).all());
  }
  const Fieldd b = bubble(grid, BubbleSpec{0.05, 5});
  const Fieldd h = hcheck_potential(grid, b, k_tilde);
  CHECK(h.minCoeff() >= 0);
  CHECK(h.maxCoeff() <= k_tilde);
  CHECK(h.maxCoeff() == k_tilde);
  CHECK(ramp(-2.0, k_tilde) == 0.0);
  CHECK(ramp(-0.5, k_tilde) == Approx(k_tilde / 2));
  for (double s = -1; s < 0; s += 0.01) CHECK(ramp(s + 0.01, k_tilde) >= ramp(s, k_tilde));
  CHECK_THROWS_AS(hcheck_potential(grid, b, 0.0), DomainError);

  // With ω = 0 the constant pair solves the modified system exactly.
  const Params params = unit_charge(5);
  const auto [c, v] = hcheck_constant_pair(params, k_tilde);
  const auto residual = hcheck_system_residual(grid, params, Fieldd::Constant(grid.size(), c).eval(),
                                               Fieldd::Constant(grid.size(), v).eval(), k_tilde);
  CHECK(residual.first <= 1e-10);
  CHECK(residual.second <= 1e-10);
}
