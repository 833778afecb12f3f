#pragma once

// Blow-up families and the diagnostics built on them: bubbles, the exact
// concentrating solutions on S^n, the phase-compensation ratio, rescaled gauge
// profiles, Pohozaev balance terms and the ȟ potential.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kgmp/energy.hpp"

namespace kgmp {

struct BubbleSpec {
  double mu = 1.0;
  int n = 3;
};

/// B_μ(r) = (μ / (μ² + r²/(n(n-2))))^((n-2)/2).
template <typename Scalar>
Scalar bubble_value(int n, Scalar mu, Scalar r) {
  const Scalar lambda_n = Scalar(1) / Scalar(n * (n - 2));
  return std::pow(mu / (mu * mu + lambda_n * r * r), Scalar(n - 2) / 2);
}

/// Limit profile u0(x) = (1 + |x|²/(n(n-2)))^(-(n-2)/2).
template <typename Scalar>
Scalar limit_profile(int n, Scalar x) {
  const Scalar lambda_n = Scalar(1) / Scalar(n * (n - 2));
  return std::pow(1 + lambda_n * x * x, -Scalar(n - 2) / 2);
}

template <typename Scalar>
Field<Scalar> bubble(const RadialGrid<Scalar>& grid, const BubbleSpec& spec) {
  if (!(spec.mu > 0)) throw DomainError("bubble: mu must be positive");
  const Scalar mu = Scalar(spec.mu);
  return sample(grid, [&](Scalar r) { return bubble_value(spec.n, mu, r); });
}

/// Exact positive solution of Δu + n(n-2)/4 u = u^(2*-1) on S^n:
/// u_β(r) = (n(n-2)/4 (β² - 1))^((n-2)/4) (β - cos r)^(-(n-2)/2).
template <typename Scalar>
Field<Scalar> sphere_solution(const RadialGrid<Scalar>& grid, Scalar beta) {
  if (!grid.geometry.is_sphere()) throw DomainError("sphere_solution: grid must be a sphere");
  if (!(beta > 1)) throw DomainError("sphere_solution: beta must exceed 1");
  const int n = grid.geometry.n;
  const Scalar amplitude = std::pow(Scalar(n * (n - 2)) / 4 * (beta * beta - 1), Scalar(n - 2) / 4);
  return sample(grid, [&](Scalar r) { return amplitude * std::pow(beta - std::cos(r), -Scalar(n - 2) / 2); });
}

/// Concentration scale μ = u(0)^(-2/(n-2)) of a pole-centred profile.
template <typename Scalar>
Scalar concentration_scale(int n, Scalar peak) {
  return std::pow(peak, -Scalar(2) / Scalar(n - 2));
}

/// The β with concentration_scale(n, u_β(0)) = μ, i.e. β = (A + 1)/(A - 1), A = 4/(n(n-2)μ²).
template <typename Scalar>
Scalar sphere_beta_for_scale(int n, Scalar mu) {
  const Scalar a = Scalar(4) / (Scalar(n * (n - 2)) * mu * mu);
  if (!(mu > 0) || !(a > 1)) throw DomainError("sphere_beta_for_scale: mu must lie in (0, 2/sqrt(n(n-2)))");
  return (a + 1) / (a - 1);
}

template <typename Scalar>
struct PhaseRatioReport {
  int n = 0;
  Scalar mu = 0;
  Scalar ratio = 0;              // ∫Φ(B_μ)B_μ² / ∫B_μ²
  Eigen::Index nodes_inside_mu = 0;
  bool under_resolved = false;   // fewer than 8 nodes in r < μ
  std::string warning;
};

inline constexpr double kPhaseGrading = 2.0;

/// ∫Φ(B_μ)B_μ² / ∫B_μ² on a γ = 2 graded S^n grid with the given interval count.
template <typename Scalar = double>
PhaseRatioReport<Scalar> phase_ratio(const Params& params, Scalar mu, int intervals) {
  if (!(mu > 0)) throw DomainError("phase_ratio: mu must be positive");
  const auto grid = build_grid<Scalar>(Geometry::sphere(params.n), intervals, kPhaseGrading);
  const Field<Scalar> b = bubble(grid, BubbleSpec{double(mu), params.n});
  const auto gauge = solve_gauge(grid, params, b);
  const Field<Scalar> square = b.array().square().matrix();

  PhaseRatioReport<Scalar> out;
  out.n = params.n;
  out.mu = mu;
  out.ratio = weighted_dot(grid, gauge.v, square) / integrate(grid, square);
  out.nodes_inside_mu = (grid.nodes.array() < mu).count();
  if (out.nodes_inside_mu < 8) {
    out.under_resolved = true;
    out.warning = "under-resolved: only " + std::to_string(out.nodes_inside_mu) +
                  " nodes inside r < mu";
  }
  return out;
}

/// v̂(x) = Φ(B_μ)(μx) at the requested rescaled radii.
template <typename Scalar = double>
std::vector<Scalar> rescaled_gauge_profile(const Params& params, Scalar mu,
                                           const std::vector<Scalar>& sample_points,
                                           int intervals = 4000) {
  if (!(mu > 0)) throw DomainError("rescaled_gauge_profile: mu must be positive");
  const auto grid = build_grid<Scalar>(Geometry::sphere(params.n), intervals, kPhaseGrading);
  for (Scalar x : sample_points)
    if (!(x >= 0) || mu * x > Scalar(grid.geometry.r_max))
      throw DomainError("rescaled_gauge_profile: sample point beyond the grid");
  const Field<Scalar> b = bubble(grid, BubbleSpec{double(mu), params.n});
  const auto gauge = solve_gauge(grid, params, b);
  std::vector<Scalar> values;
  values.reserve(sample_points.size());
  for (Scalar x : sample_points) values.push_back(interpolate(grid, gauge.v, mu * x));
  return values;
}

// ---------------------------------------------------------------------------
// Pohozaev balance.
//
// For u solving Δu + h u = u^(p-1) with h = m0² - ω²(qv - 1)², pairing the
// equation with X(∇u) + k(div X)u, k = (n-2)/(2n), over B(r0) gives
//
//   m0² M + (k/2)∫(Δ div X)u² = ω² R̃ + Q1 - Q2 + Q3 + (k - 1/p)∫(div X)u^p,
//
// M = ∫{u X(∇u) + k(div X)u²}, R̃ = ∫(qv - 1)²{...}.  The last term vanishes
// at p = 2*.  X is the radial field a(r)∂_r: a = r(1 - r²/6) on S^n (the
// Ricci-corrected gradient of d²/2), a = r on a flat ball.

template <typename Scalar>
struct PohozaevReport {
  Scalar r0 = 0;                // radius actually used (snapped to a node)
  std::string note;             // set when r0 was snapped
  Scalar lhs_mass = 0;          // ∫{u X(∇u) + k(div X)u²}
  Scalar lhs_curv = 0;          // (k/2)∫(Δ div X)u²
  Scalar R_tilde = 0;           // ∫(qv - 1)²{u X(∇u) + k(div X)u²}
  Scalar Q1 = 0;
  Scalar Q2 = 0;
  Scalar Q3 = 0;
  Scalar subcritical_term = 0;  // (k - 1/p)∫(div X)u^p, zero when p = 2*
  Scalar lhs = 0;               // m0² lhs_mass + lhs_curv
  Scalar rhs = 0;               // ω² R̃ + Q1 - Q2 + Q3 + subcritical_term
  Scalar balance_residual = 0;  // |lhs - rhs|
};

template <typename Scalar>
struct PohozaevField {
  Scalar a;         // X = a ∂_r
  Scalar da;        // a'
  Scalar div;       // div X
  Scalar ddiv;      // (div X)'
};

template <typename Scalar>
PohozaevField<Scalar> pohozaev_field(const Geometry& geometry, Scalar r) {
  const int n = geometry.n;
  if (!geometry.is_sphere()) return {r, Scalar(1), Scalar(n), Scalar(0)};
  const Scalar a = r - r * r * r / 6;
  const Scalar da = 1 - r * r / 2;
  if (r == 0) return {Scalar(0), Scalar(1), Scalar(n), Scalar(0)};
  const Scalar cot = std::cos(r) / std::sin(r);
  const Scalar csc_sq = 1 / (std::sin(r) * std::sin(r));
  const Scalar div = da + (n - 1) * cot * a;
  const Scalar ddiv = -r + (n - 1) * (-csc_sq * a + cot * da);
  return {a, da, div, ddiv};
}

template <typename Scalar, typename DerivedU, typename DerivedV>
PohozaevReport<Scalar> pohozaev_terms(const RadialGrid<Scalar>& grid, const Params& params,
                                      const Eigen::MatrixBase<DerivedU>& u_in,
                                      const Eigen::MatrixBase<DerivedV>& v_in, Scalar r0) {
  check_on_grid(grid, u_in, "pohozaev_terms");
  check_on_grid(grid, v_in, "pohozaev_terms");
  if (!(r0 > 0) || !(r0 < Scalar(grid.geometry.r_max)))
    throw DomainError("pohozaev_terms: r0 must lie in (0, r_max)");
  const Field<Scalar> u = u_in;
  const Field<Scalar> v = v_in;
  const int n = grid.geometry.n;
  const Scalar k = Scalar(n - 2) / Scalar(2 * n);
  const Scalar p = Scalar(params.p);
  const Scalar q = Scalar(params.q);

  PohozaevReport<Scalar> out;
  Eigen::Index edge = nearest_node(grid, r0);
  if (edge < 2) edge = 2;
  if (edge + 1 >= grid.size()) edge = grid.size() - 2;
  out.r0 = grid.nodes[edge];
  if (out.r0 != r0) out.note = "r0 snapped to nearest node " + std::to_string(double(out.r0));

  const Field<Scalar> du = radial_derivative(grid, u);
  const Scalar area = sphere_area<Scalar>(n - 1);

  Field<Scalar> div = Field<Scalar>::Zero(grid.size());
  for (Eigen::Index i = 0; i <= edge + 1; ++i) div[i] = pohozaev_field(grid.geometry, grid.nodes[i]).div;
  const Field<Scalar> lap_div = assemble_laplacian(grid).laplacian(div);

  // Trapezoid rule in r with the exact radial density; integrands are sampled at nodes.
  Field<Scalar> mass(edge + 1), curv(edge + 1), gauge(edge + 1), deviatoric(edge + 1), power(edge + 1);
  for (Eigen::Index i = 0; i <= edge; ++i) {
    const auto x = pohozaev_field(grid.geometry, grid.nodes[i]);
    const Scalar rho = area * metric_density(grid.geometry, grid.nodes[i]);
    const Scalar m = u[i] * x.a * du[i] + k * x.div * u[i] * u[i];
    const Scalar shift = q * v[i] - 1;
    mass[i] = rho * m;
    gauge[i] = rho * shift * shift * m;
    curv[i] = rho * lap_div[i] * u[i] * u[i];
    deviatoric[i] = rho * (x.da - x.div / n) * du[i] * du[i];
    power[i] = rho * x.div * (u[i] > 0 ? std::pow(u[i], p) : Scalar(0));
  }
  auto trapezoid = [&](const Field<Scalar>& f) {
    Scalar total = 0;
    for (Eigen::Index i = 0; i < edge; ++i) total += grid.spacing(i) * (f[i] + f[i + 1]) / 2;
    return total;
  };
  out.lhs_mass = trapezoid(mass);
  out.lhs_curv = k / 2 * trapezoid(curv);
  out.R_tilde = trapezoid(gauge);
  out.Q2 = trapezoid(deviatoric);
  out.subcritical_term = (k - 1 / p) * trapezoid(power);

  const auto x = pohozaev_field(grid.geometry, out.r0);
  const Scalar boundary = area * metric_density(grid.geometry, out.r0);
  const Scalar ub = u[edge], dub = du[edge];
  const Scalar ub_pow = ub > 0 ? std::pow(ub, p) : Scalar(0);
  out.Q1 = boundary * (k * x.div * dub * ub + Scalar(0.5) * x.a * dub * dub);
  out.Q3 = boundary * (x.a * ub_pow / p - k / 2 * x.ddiv * ub * ub);

  const Scalar m0_sq = Scalar(params.m0) * Scalar(params.m0);
  const Scalar omega_sq = Scalar(params.omega) * Scalar(params.omega);
  out.lhs = m0_sq * out.lhs_mass + out.lhs_curv;
  out.rhs = omega_sq * out.R_tilde + out.Q1 - out.Q2 + out.Q3 + out.subcritical_term;
  out.balance_residual = std::abs(out.lhs - out.rhs);
  return out;
}

// ---------------------------------------------------------------------------
// ȟ potential.

/// Quintic smoothstep ramp: 0 for s <= -1, K̃ for s >= 0, C² and monotone between.
template <typename Scalar>
Scalar ramp(Scalar s, Scalar k_tilde) {
  if (s <= -1) return 0;
  if (s >= 0) return k_tilde;
  const Scalar t = s + 1;
  return k_tilde * t * t * t * (t * (6 * t - 15) + 10);
}

/// ȟ(u) = φ(√((n-2)/n)|u|^(n/(n-2)) - |∇u|) node-wise.
template <typename Scalar, typename Derived>
Field<Scalar> hcheck_potential(const RadialGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& u_in,
                               Scalar k_tilde) {
  if (!(k_tilde > 0)) throw DomainError("hcheck_potential: K_tilde must be positive");
  const Field<Scalar> u = u_in;
  const Field<Scalar> du = radial_derivative(grid, u);
  const int n = grid.geometry.n;
  const Scalar factor = std::sqrt(Scalar(n - 2) / Scalar(n));
  const Scalar exponent = Scalar(n) / Scalar(n - 2);
  Field<Scalar> h(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    h[i] = ramp(factor * std::pow(std::abs(u[i]), exponent) - std::abs(du[i]), k_tilde);
  return h;
}

namespace detail {

// ∫_0^b f(r) dr with b possibly infinite, by composite 8-point Gauss-Legendre
// after r = s/(1-s).
template <typename Scalar, typename Fn>
Scalar radial_quadrature(Fn&& f, Scalar upper, int panels = 4000) {
  static constexpr std::array<double, 8> nodes = {
      -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
      0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> weights = {
      0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
      0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  const Scalar s_max = std::isinf(upper) ? Scalar(1) : upper / (1 + upper);
  const Scalar width = s_max / panels;
  Scalar total = 0;
  for (int j = 0; j < panels; ++j) {
    const Scalar centre = (j + Scalar(0.5)) * width;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const Scalar s = centre + width / 2 * Scalar(nodes[k]);
      const Scalar one_minus = 1 - s;
      total += Scalar(weights[k]) * width / 2 * f(s / one_minus) / (one_minus * one_minus);
    }
  }
  return total;
}

}  // namespace detail

/// ∫_{ℝⁿ} u0² dx, finite for n >= 5.
template <typename Scalar = double>
Scalar profile_l2_mass(int n) {
  if (n < 5) throw DomainError("profile_l2_mass: u0 is square-integrable only for n >= 5");
  const Scalar area = sphere_area<Scalar>(n - 1);
  return area * detail::radial_quadrature<Scalar>(
                    [n](Scalar r) {
                      const Scalar u0 = limit_profile(n, r);
                      return std::pow(r, n - 1) * u0 * u0;
                    },
                    std::numeric_limits<Scalar>::infinity());
}

/// Smallest admissible K̃ for the given model, plus a 10% margin.
///
/// K̃ must exceed both (∫u0² / ∫_{B(√(n(n-2)))}Ψ0)·(-(n-2)/(4(n-1)) min S_g) and
/// (n-2)/(4(n-1)) max S_g, where Ψ0 = (n-2)/2 u0² + ⟨x, ∇u0⟩u0.  When both
/// bounds vanish (flat ball) K̃ = 1.
template <typename Scalar = double>
Scalar default_k_tilde(const Geometry& geometry) {
  const int n = geometry.n;
  if (n < 5) throw DomainError("default_k_tilde: requires n >= 5");
  const Scalar curvature = Scalar(geometry.scalar_curvature());
  const Scalar conformal = Scalar(n - 2) / Scalar(4 * (n - 1));
  const Scalar radius = std::sqrt(Scalar(n * (n - 2)));
  const Scalar area = sphere_area<Scalar>(n - 1);
  const Scalar inner = area * detail::radial_quadrature<Scalar>(
                                  [n](Scalar r) {
                                    const Scalar u0 = limit_profile(n, r);
                                    const Scalar lambda_n = Scalar(1) / Scalar(n * (n - 2));
                                    const Scalar shape =
                                        Scalar(n - 2) / 2 - (r * r / n) / (1 + lambda_n * r * r);
                                    return std::pow(r, n - 1) * u0 * u0 * shape;
                                  },
                                  radius);
  const Scalar bound_mass = profile_l2_mass<Scalar>(n) / inner * (-conformal * curvature);
  const Scalar bound_curvature = conformal * curvature;
  const Scalar bound = std::max(bound_mass, bound_curvature);
  return bound > 0 ? Scalar(1.1) * bound : Scalar(1);
}

/// Constant pair (K̃^((n-2)/4), qK̃^((n-2)/2) / (m1² + q²K̃^((n-2)/2))) of the ȟ-modified system.
template <typename Scalar = double>
std::pair<Scalar, Scalar> hcheck_constant_pair(const Params& params, Scalar k_tilde) {
  const int n = params.n;
  const Scalar c = std::pow(k_tilde, Scalar(n - 2) / 4);
  const Scalar c_sq = std::pow(k_tilde, Scalar(n - 2) / 2);
  const Scalar q = Scalar(params.q);
  const Scalar v = q * c_sq / (Scalar(params.m1 * params.m1) + q * q * c_sq);
  return {c, v};
}

/// Max-norm residuals of
///   Δu + (ȟ(u) + ω²(1-qv)²)u = u^(2*-1) + ω²(1-qv)²u,
///   Δv + (m1² + q²u²)v = qu².
template <typename Scalar, typename DerivedU, typename DerivedV>
std::pair<Scalar, Scalar> hcheck_system_residual(const RadialGrid<Scalar>& grid, const Params& params,
                                                 const Eigen::MatrixBase<DerivedU>& u_in,
                                                 const Eigen::MatrixBase<DerivedV>& v_in, Scalar k_tilde) {
  const Field<Scalar> u = u_in;
  const Field<Scalar> v = v_in;
  check_on_grid(grid, u, "hcheck_system_residual");
  check_on_grid(grid, v, "hcheck_system_residual");
  const int n = grid.geometry.n;
  const Scalar critical = Scalar(2 * n) / Scalar(n - 2);
  const Scalar q = Scalar(params.q);
  const Scalar omega_sq = Scalar(params.omega * params.omega);
  const auto laplacian = assemble_laplacian(grid);
  const Field<Scalar> h = hcheck_potential(grid, u, k_tilde);
  const Field<Scalar> coupling = (omega_sq * (1 - q * v.array()).square()).matrix();
  Field<Scalar> first = laplacian.laplacian(u);
  first.array() += (h + coupling).array() * u.array() -
                   detail::positive_power(u, critical - 1).array() - coupling.array() * u.array();
  Field<Scalar> second = laplacian.laplacian(v);
  second.array() += (Scalar(params.m1 * params.m1) + q * q * u.array().square()) * v.array() -
                    q * u.array().square();
  return {first.cwiseAbs().maxCoeff(), second.cwiseAbs().maxCoeff()};
}

}  // namespace kgmp
