#pragma once

// The gauge map v = Φ(u): the unique solution of
//   Δv + (m1² + q²u²) v = q u².
// On a finite grid the restricted weak formulation is just this linear
// system; its zeroth-order term is positive, so the M-matrix maximum
// principle gives 0 <= v <= 1/q node-wise.

#include <algorithm>
#include <cmath>
#include <vector>

#include "kgmp/elliptic.hpp"

namespace kgmp {

template <typename Scalar>
struct GaugeResult {
  Field<Scalar> v;
  Scalar min_v = 0;
  Scalar max_v = 0;
  Scalar bound_violation = 0;  // max(0, -min_v, max_v - 1/q)
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& u, const char* where) {
  if (!u.allFinite()) throw DomainError(std::string(where) + ": input field is not finite");
}

// Solves Δv + (m1² + q² s) v = q s for a nonnegative source profile s (= u²).
template <typename Scalar>
Field<Scalar> gauge_from_square(const RadialGrid<Scalar>& grid, const Params& params,
                                const Field<Scalar>& square) {
  const Scalar q = Scalar(params.q);
  const Scalar m1_sq = Scalar(params.m1) * Scalar(params.m1);
  Field<Scalar> potential = (m1_sq + q * q * square.array()).matrix();
  Field<Scalar> rhs = q * square;
  if (grid.dirichlet_outer()) rhs[grid.size() - 1] = 0;
  return solve(assemble(grid, potential), rhs);
}

}  // namespace detail

template <typename Scalar>
GaugeResult<Scalar> summarize_gauge(const Params& params, Field<Scalar> v) {
  GaugeResult<Scalar> out;
  out.min_v = v.minCoeff();
  out.max_v = v.maxCoeff();
  const Scalar cap = Scalar(1) / Scalar(params.q);
  out.bound_violation = std::max({Scalar(0), -out.min_v, out.max_v - cap});
  out.v = std::move(v);
  return out;
}

template <typename Scalar, typename Derived>
GaugeResult<Scalar> solve_gauge(const RadialGrid<Scalar>& grid, const Params& params,
                                const Eigen::MatrixBase<Derived>& u) {
  check_on_grid(grid, u, "solve_gauge");
  detail::require_finite(u, "solve_gauge");
  const Field<Scalar> square = u.array().square().matrix();
  return summarize_gauge(params, detail::gauge_from_square(grid, params, square));
}

template <typename Scalar>
struct TruncationStep {
  Scalar lambda = 0;
  Field<Scalar> phi;
  Scalar h1_delta_to_final = 0;  // discrete H¹ distance to solve_gauge(u).v
};

/// Solves the truncated gauge equations with u_Λ = min(|u|, Λ) for each Λ and
/// measures how far each Φ_Λ is from the untruncated solve.
template <typename Scalar, typename Derived>
std::vector<TruncationStep<Scalar>> truncation_sequence(const RadialGrid<Scalar>& grid,
                                                        const Params& params,
                                                        const Eigen::MatrixBase<Derived>& u,
                                                        const std::vector<Scalar>& lambdas) {
  check_on_grid(grid, u, "truncation_sequence");
  detail::require_finite(u, "truncation_sequence");
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] > 0)) throw DomainError("truncation_sequence: levels must be positive");
    if (k > 0 && !(lambdas[k] > lambdas[k - 1]))
      throw DomainError("truncation_sequence: levels must be increasing");
  }
  const Field<Scalar> reference = solve_gauge(grid, params, u).v;
  std::vector<TruncationStep<Scalar>> steps;
  steps.reserve(lambdas.size());
  for (Scalar lambda : lambdas) {
    const Field<Scalar> truncated = u.array().abs().min(lambda).square().matrix();
    TruncationStep<Scalar> step;
    step.lambda = lambda;
    step.phi = detail::gauge_from_square(grid, params, truncated);
    step.h1_delta_to_final = std::sqrt(h1_norm_sq(grid, (step.phi - reference).eval()));
    steps.push_back(std::move(step));
  }
  return steps;
}

template <typename Scalar>
struct ContinuityCheck {
  Scalar lhs = 0;  // ‖Φ(u1) - Φ(u2)‖²_H¹
  Scalar rhs = 0;  // C ‖u1 + u2‖_L² ‖u1 - u2‖_L², C = 1 / min(1, m1²)
  bool holds(Scalar relative_tolerance = Scalar(1e-8)) const {
    return lhs <= rhs * (1 + relative_tolerance) + std::numeric_limits<Scalar>::min();
  }
};

/// Both sides of ‖Φ(u1) - Φ(u2)‖²_H¹ <= C ‖u1 + u2‖_L² ‖u1 - u2‖_L².
///
/// C = 1/min(1, m1²) follows from testing the difference equation with the
/// difference itself and using |1 - qΦ| <= 1.
template <typename Scalar, typename DerivedA, typename DerivedB>
ContinuityCheck<Scalar> continuity_check(const RadialGrid<Scalar>& grid, const Params& params,
                                         const Eigen::MatrixBase<DerivedA>& u1,
                                         const Eigen::MatrixBase<DerivedB>& u2) {
  check_on_grid(grid, u1, "continuity_check");
  check_on_grid(grid, u2, "continuity_check");
  const Field<Scalar> first = u1;
  const Field<Scalar> second = u2;
  const Field<Scalar> diff = solve_gauge(grid, params, first).v - solve_gauge(grid, params, second).v;
  const Scalar constant = Scalar(1) / std::min(Scalar(1), Scalar(params.m1 * params.m1));
  ContinuityCheck<Scalar> out;
  out.lhs = h1_norm_sq(grid, diff);
  out.rhs = constant * std::sqrt(l2_norm_sq(grid, (first + second).eval())) *
            std::sqrt(l2_norm_sq(grid, (first - second).eval()));
  return out;
}

}  // namespace kgmp
