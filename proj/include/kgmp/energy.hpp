#pragma once

// Mountain-pass functional
//   I(u) = ½∫|∇u|² + (m0²/2)∫u² - (1/p)∫(u⁺)^p - (ω²/2)∫(1 - qΦ(u))u²
// and the auxiliary energy Ψ(u) = ½∫(1 - qΦ(u))u².
//
// Because the gauge operator is W-self-adjoint, the discrete Ψ has the exact
// W-gradient (1 - qΦ(u))² u: differentiating Φ produces a term that cancels
// against the derivative of u² through the gauge equation itself.

#include <algorithm>
#include <cmath>

#include "kgmp/gauge.hpp"

namespace kgmp {

template <typename Scalar>
struct EnergyBreakdown {
  Scalar dirichlet = 0;       // ½∫|∇u|²
  Scalar mass = 0;            // (m0²/2)∫u²
  Scalar nonlinear = 0;       // (1/p)∫(u⁺)^p
  Scalar gauge_coupling = 0;  // (ω²/2)∫(1 - qΦ(u))u²
  Scalar total = 0;
};

namespace detail {

template <typename Scalar>
Field<Scalar> positive_power(const Field<Scalar>& u, Scalar exponent) {
  return u.unaryExpr([exponent](Scalar x) { return x > 0 ? Scalar(std::pow(x, exponent)) : Scalar(0); });
}

template <typename Scalar>
Scalar psi_from_gauge(const RadialGrid<Scalar>& grid, const Params& params, const Field<Scalar>& u,
                      const Field<Scalar>& v) {
  const Scalar q = Scalar(params.q);
  return Scalar(0.5) * (grid.cell_weights.array() * (1 - q * v.array()) * u.array().square()).sum();
}

}  // namespace detail

template <typename Scalar, typename Derived>
Scalar aux_psi(const RadialGrid<Scalar>& grid, const Params& params,
               const Eigen::MatrixBase<Derived>& u) {
  const Field<Scalar> field = u;
  const auto gauge = solve_gauge(grid, params, field);
  return detail::psi_from_gauge(grid, params, field, gauge.v);
}

/// W-gradient of aux_psi: ⟨grad_psi(u), φ⟩_W = DΨ(u)·φ.
template <typename Scalar, typename Derived>
Field<Scalar> grad_psi(const RadialGrid<Scalar>& grid, const Params& params,
                       const Eigen::MatrixBase<Derived>& u) {
  const Field<Scalar> field = u;
  const auto gauge = solve_gauge(grid, params, field);
  const Scalar q = Scalar(params.q);
  return ((1 - q * gauge.v.array()).square() * field.array()).matrix();
}

template <typename Scalar>
EnergyBreakdown<Scalar> energy_with_gauge(const RadialGrid<Scalar>& grid, const Params& params,
                                          const Field<Scalar>& u, const Field<Scalar>& v) {
  const Scalar m0_sq = Scalar(params.m0) * Scalar(params.m0);
  const Scalar omega_sq = Scalar(params.omega) * Scalar(params.omega);
  const Scalar p = Scalar(params.p);
  EnergyBreakdown<Scalar> out;
  out.dirichlet = Scalar(0.5) * dirichlet_energy(grid, u);
  out.mass = Scalar(0.5) * m0_sq * l2_norm_sq(grid, u);
  out.nonlinear = integrate(grid, detail::positive_power(u, p)) / p;
  out.gauge_coupling = omega_sq * detail::psi_from_gauge(grid, params, u, v);
  out.total = out.dirichlet + out.mass - out.nonlinear - out.gauge_coupling;
  return out;
}

template <typename Scalar, typename Derived>
EnergyBreakdown<Scalar> energy(const RadialGrid<Scalar>& grid, const Params& params,
                               const Eigen::MatrixBase<Derived>& u) {
  const Field<Scalar> field = u;
  check_on_grid(grid, field, "energy");
  detail::require_finite(field, "energy");
  const auto gauge = solve_gauge(grid, params, field);
  return energy_with_gauge(grid, params, field, gauge.v);
}

/// W-gradient of I given a precomputed gauge v = Φ(u):
/// Lu + m0²u - (u⁺)^(p-1) - ω²(1 - qv)²u.
template <typename Scalar>
Field<Scalar> grad_energy_with_gauge(const RadialGrid<Scalar>& grid, const Params& params,
                                     const Field<Scalar>& u, const Field<Scalar>& v) {
  const Scalar m0_sq = Scalar(params.m0) * Scalar(params.m0);
  const Scalar omega_sq = Scalar(params.omega) * Scalar(params.omega);
  const Scalar q = Scalar(params.q);
  const auto laplacian = assemble_laplacian(grid);
  Field<Scalar> g = laplacian.laplacian(u);
  g.array() += m0_sq * u.array() - detail::positive_power(u, Scalar(params.p - 1)).array() -
               omega_sq * (1 - q * v.array()).square() * u.array();
  if (grid.dirichlet_outer()) g[grid.size() - 1] = 0;
  return g;
}

template <typename Scalar, typename Derived>
Field<Scalar> grad_energy(const RadialGrid<Scalar>& grid, const Params& params,
                          const Eigen::MatrixBase<Derived>& u) {
  const Field<Scalar> field = u;
  check_on_grid(grid, field, "grad_energy");
  const auto gauge = solve_gauge(grid, params, field);
  return grad_energy_with_gauge(grid, params, field, gauge.v);
}

/// Sharp Euclidean Sobolev constant: n(n-2) ω_n^(2/n) K_n² = 4.
template <typename Scalar = double>
Scalar sobolev_Kn(int n) {
  if (n < 3) throw DomainError("sobolev_Kn: n must be >= 3");
  const Scalar omega_n = sphere_area<Scalar>(n);
  return Scalar(2) / std::sqrt(Scalar(n * (n - 2)) * std::pow(omega_n, Scalar(2) / Scalar(n)));
}

/// Compactness threshold 1/(n K_n^n) for mountain-pass levels in the critical case.
template <typename Scalar = double>
Scalar mp_threshold(int n) {
  return Scalar(1) / (Scalar(n) * std::pow(sobolev_Kn<Scalar>(n), n));
}

/// Truncated bubble u_ε(r) = (ε/(ε² + r²))^((n-2)/2) - (ε/(ε² + ρ0²))^((n-2)/2) on r <= ρ0.
template <typename Scalar>
Field<Scalar> aubin_test_function(const RadialGrid<Scalar>& grid, Scalar epsilon, Scalar rho0) {
  if (!(epsilon > 0)) throw DomainError("aubin_test_function: epsilon must be positive");
  if (!(rho0 > 0) || !(rho0 < Scalar(grid.geometry.r_max)))
    throw DomainError("aubin_test_function: rho0 must lie in (0, r_max)");
  const Scalar exponent = Scalar(grid.geometry.n - 2) / 2;
  auto profile = [&](Scalar r) { return std::pow(epsilon / (epsilon * epsilon + r * r), exponent); };
  const Scalar floor = profile(rho0);
  return sample(grid, [&](Scalar r) { return r <= rho0 ? profile(r) - floor : Scalar(0); });
}

/// (∫|∇u|² + λ∫u²) / (∫|u|^(2*))^(2/2*).
template <typename Scalar, typename Derived>
Scalar aubin_quotient(const RadialGrid<Scalar>& grid, Scalar lambda, const Eigen::MatrixBase<Derived>& u) {
  const Field<Scalar> field = u;
  check_on_grid(grid, field, "aubin_quotient");
  const int n = grid.geometry.n;
  const Scalar critical = Scalar(2 * n) / Scalar(n - 2);
  const Scalar denominator_base = integrate(grid, field.array().abs().pow(critical).matrix().eval());
  if (!(denominator_base > 0)) throw DomainError("aubin_quotient: zero field");
  const Scalar numerator = dirichlet_energy(grid, field) + lambda * l2_norm_sq(grid, field);
  return numerator / std::pow(denominator_base, Scalar(2) / critical);
}

}  // namespace kgmp
