#pragma once

// Numerical mountain-pass search over discretized paths from 0 to a
// negative-energy endpoint, followed by damped Newton on the coupled system.
//
// The path only supplies a starting guess and a level estimate.  A solution
// is accepted when the refined pair satisfies both discrete equations to
// 1e-8 in max-norm and u > 0 at every node.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "kgmp/asymptotics.hpp"
#include "kgmp/energy.hpp"

namespace kgmp {

struct MPConfig {
  int path_points = 40;            // P: the path has P + 1 nodes including endpoints
  int max_outer_iters = 3000;
  double descent_step = 1.0;       // initial step along the preconditioned gradient
  double grad_tol = 1e-6;          // on ‖grad‖_W at the max node
  double endpoint_scale_max = 1e6;

  void validate() const {
    if (path_points < 3) throw DomainError("MPConfig: path_points must be >= 3");
    if (max_outer_iters < 1) throw DomainError("MPConfig: max_outer_iters must be >= 1");
    if (!(descent_step > 0) || !(grad_tol > 0) || !(endpoint_scale_max > 1))
      throw DomainError("MPConfig: tolerances and steps must be positive");
  }
};

struct NewtonConfig {
  int max_iters = 60;
  double tol = 1e-12;          // stop when both residuals are below this
  double accept_floor = 1e-8;  // a stalled iteration below this counts as converged
  int max_halvings = 20;
};

inline constexpr double kResidualGate = 1e-8;

template <typename Scalar>
struct SolveReport {
  Field<Scalar> u;
  Field<Scalar> v;
  Scalar level_c = 0;          // I at the refined solution
  Scalar path_level = 0;       // I at the max node of the final path
  Scalar grad_norm = 0;        // ‖grad I‖_W at the refined solution
  Scalar residual1 = 0;        // max-norm of the first discrete equation
  Scalar residual2 = 0;        // max-norm of the second discrete equation
  int newton_iters = 0;
  Scalar min_u = 0;
  Scalar max_u = 0;
  int path_iterations = 0;
  bool path_converged = false;
  std::vector<Scalar> level_history;
  std::vector<Scalar> newton_history;

  bool accepted() const {
    return residual1 <= kResidualGate && residual2 <= kResidualGate && min_u > 0;
  }
};

/// Residual fields of the coupled system
///   F1 = Lu + m0²u - (u⁺)^(p-1) - ω²(1-qv)²u,  F2 = Lv + (m1² + q²u²)v - qu².
/// On a ball the last entries are the Dirichlet rows u_N, v_N.
template <typename Scalar>
std::pair<Field<Scalar>, Field<Scalar>> coupled_residual(const RadialGrid<Scalar>& grid,
                                                         const Params& params, const Field<Scalar>& u,
                                                         const Field<Scalar>& v) {
  const auto laplacian = assemble_laplacian(grid);
  const Scalar m0_sq = Scalar(params.m0 * params.m0);
  const Scalar m1_sq = Scalar(params.m1 * params.m1);
  const Scalar omega_sq = Scalar(params.omega * params.omega);
  const Scalar q = Scalar(params.q);
  Field<Scalar> f1 = laplacian.laplacian(u);
  f1.array() += m0_sq * u.array() - detail::positive_power(u, Scalar(params.p - 1)).array() -
                omega_sq * (1 - q * v.array()).square() * u.array();
  Field<Scalar> f2 = laplacian.laplacian(v);
  f2.array() += (m1_sq + q * q * u.array().square()) * v.array() - q * u.array().square();
  if (grid.dirichlet_outer()) {
    f1[grid.size() - 1] = u[grid.size() - 1];
    f2[grid.size() - 1] = v[grid.size() - 1];
  }
  return {std::move(f1), std::move(f2)};
}

namespace detail {

template <typename Scalar>
Scalar residual_norm(const std::pair<Field<Scalar>, Field<Scalar>>& f) {
  return std::max(f.first.cwiseAbs().maxCoeff(), f.second.cwiseAbs().maxCoeff());
}

// Jacobian of (F1, F2) with unknowns interleaved as (u_0, v_0, u_1, v_1, ...).
template <typename Scalar>
Eigen::SparseMatrix<Scalar> coupled_jacobian(const RadialGrid<Scalar>& grid, const Params& params,
                                             const Field<Scalar>& u, const Field<Scalar>& v) {
  const auto laplacian = assemble_laplacian(grid);
  const Eigen::Index count = grid.size();
  const Scalar m0_sq = Scalar(params.m0 * params.m0);
  const Scalar m1_sq = Scalar(params.m1 * params.m1);
  const Scalar omega_sq = Scalar(params.omega * params.omega);
  const Scalar q = Scalar(params.q);
  const Field<Scalar> power = positive_power(u, Scalar(params.p - 2));

  std::vector<Eigen::Triplet<Scalar>> entries;
  entries.reserve(std::size_t(count) * 8);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Eigen::Index ru = 2 * i, rv = 2 * i + 1;
    if (grid.dirichlet_outer() && i == count - 1) {
      entries.emplace_back(ru, ru, Scalar(1));
      entries.emplace_back(rv, rv, Scalar(1));
      continue;
    }
    const Scalar shift = 1 - q * v[i];
    const Scalar diag = laplacian.diag()[i];
    entries.emplace_back(ru, ru, diag + m0_sq - Scalar(params.p - 1) * power[i] - omega_sq * shift * shift);
    entries.emplace_back(ru, rv, 2 * q * omega_sq * shift * u[i]);
    entries.emplace_back(rv, ru, -2 * q * u[i] * shift);
    entries.emplace_back(rv, rv, diag + m1_sq + q * q * u[i] * u[i]);
    if (i > 0) {
      entries.emplace_back(ru, ru - 2, laplacian.sub()[i]);
      entries.emplace_back(rv, rv - 2, laplacian.sub()[i]);
    }
    if (i + 1 < count) {
      entries.emplace_back(ru, ru + 2, laplacian.super()[i]);
      entries.emplace_back(rv, rv + 2, laplacian.super()[i]);
    }
  }
  Eigen::SparseMatrix<Scalar> jacobian(2 * count, 2 * count);
  jacobian.setFromTriplets(entries.begin(), entries.end());
  return jacobian;
}

template <typename Scalar>
void fill_report(const RadialGrid<Scalar>& grid, const Params& params, SolveReport<Scalar>& report) {
  const auto f = coupled_residual(grid, params, report.u, report.v);
  report.residual1 = f.first.cwiseAbs().maxCoeff();
  report.residual2 = f.second.cwiseAbs().maxCoeff();
  report.min_u = report.u.minCoeff();
  report.max_u = report.u.maxCoeff();
  if (grid.dirichlet_outer() && grid.size() > 1)
    report.min_u = report.u.head(grid.size() - 1).minCoeff();
  report.level_c = energy_with_gauge(grid, params, report.u, report.v).total;
  const Field<Scalar> g = grad_energy_with_gauge(grid, params, report.u, report.v);
  report.grad_norm = std::sqrt(l2_norm_sq(grid, g));
}

}  // namespace detail

/// Damped Newton on the 2(N+1) unknowns (u, v) of the coupled system.
template <typename Scalar, typename DerivedU, typename DerivedV>
SolveReport<Scalar> newton_refine(const RadialGrid<Scalar>& grid, const Params& params,
                                  const Eigen::MatrixBase<DerivedU>& u0,
                                  const Eigen::MatrixBase<DerivedV>& v0,
                                  const NewtonConfig& config = {}) {
  check_on_grid(grid, u0, "newton_refine");
  check_on_grid(grid, v0, "newton_refine");
  if (!u0.allFinite() || !v0.allFinite()) throw DomainError("newton_refine: initial guess is not finite");

  const Eigen::Index count = grid.size();
  Field<Scalar> u = u0, v = v0;
  auto residual = coupled_residual(grid, params, u, v);
  Scalar norm = detail::residual_norm(residual);

  SolveReport<Scalar> report;
  report.newton_history.push_back(norm);
  int iterations = 0;
  while (norm > Scalar(config.tol)) {
    if (iterations == config.max_iters) {
      if (norm <= Scalar(config.accept_floor)) break;
      throw SolverError(SolverFailure::NewtonDiverged,
                        "iteration cap reached with residual " + std::to_string(double(norm)),
                        std::vector<double>(report.newton_history.begin(), report.newton_history.end()));
    }
    Field<Scalar> rhs(2 * count);
    for (Eigen::Index i = 0; i < count; ++i) {
      rhs[2 * i] = -residual.first[i];
      rhs[2 * i + 1] = -residual.second[i];
    }
    Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
    lu.compute(detail::coupled_jacobian(grid, params, u, v));
    if (lu.info() != Eigen::Success)
      throw SolverError(SolverFailure::NewtonDiverged, "singular Jacobian");
    const Field<Scalar> step = lu.solve(rhs);

    Scalar damping = 1;
    bool accepted = false;
    for (int halving = 0; halving <= config.max_halvings; ++halving, damping /= 2) {
      Field<Scalar> trial_u(count), trial_v(count);
      for (Eigen::Index i = 0; i < count; ++i) {
        trial_u[i] = u[i] + damping * step[2 * i];
        trial_v[i] = v[i] + damping * step[2 * i + 1];
      }
      auto trial = coupled_residual(grid, params, trial_u, trial_v);
      const Scalar trial_norm = detail::residual_norm(trial);
      if (std::isfinite(double(trial_norm)) && trial_norm < norm) {
        u = std::move(trial_u);
        v = std::move(trial_v);
        residual = std::move(trial);
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    ++iterations;
    if (!accepted) {
      if (norm <= Scalar(config.accept_floor)) break;  // at the rounding floor
      throw SolverError(SolverFailure::NewtonDiverged,
                        "step rejected " + std::to_string(config.max_halvings) + " times at residual " +
                            std::to_string(double(norm)),
                        std::vector<double>(report.newton_history.begin(), report.newton_history.end()));
    }
    report.newton_history.push_back(norm);
  }

  report.u = std::move(u);
  report.v = std::move(v);
  report.newton_iters = iterations;
  detail::fill_report(grid, params, report);
  report.path_level = report.level_c;
  return report;
}

/// Root of m0² = c^(p-2) + ω²(1 - qV(c))², V(c) = qc²/(m1² + q²c²), with the gauge value.
template <typename Scalar = double>
std::optional<std::pair<Scalar, Scalar>> constant_solution(const Params& params) {
  const Scalar m0_sq = Scalar(params.m0 * params.m0);
  const Scalar m1_sq = Scalar(params.m1 * params.m1);
  const Scalar omega_sq = Scalar(params.omega * params.omega);
  const Scalar q = Scalar(params.q);
  const Scalar exponent = Scalar(params.p - 2);
  auto gauge = [&](Scalar c) { return q * c * c / (m1_sq + q * q * c * c); };
  auto scalar_residual = [&](Scalar c) {
    const Scalar shift = 1 - q * gauge(c);
    return std::pow(c, exponent) + omega_sq * shift * shift - m0_sq;
  };

  if (omega_sq == 0) {
    const Scalar c = std::pow(m0_sq, 1 / exponent);
    return std::make_pair(c, gauge(c));
  }

  // Scan a logarithmic grid for the first sign change, then bisect.
  std::optional<std::pair<Scalar, Scalar>> bracket;
  Scalar previous_c = Scalar(1e-8);
  Scalar previous = scalar_residual(previous_c);
  for (Scalar c = previous_c * Scalar(1.25); c < Scalar(1e8); c *= Scalar(1.25)) {
    const Scalar value = scalar_residual(c);
    if ((previous < 0) != (value < 0) || value == 0) {
      bracket = std::make_pair(previous_c, c);
      break;
    }
    previous_c = c;
    previous = value;
  }
  if (!bracket) return std::nullopt;

  auto [lo, hi] = *bracket;
  Scalar f_lo = scalar_residual(lo);
  for (int it = 0; it < 200 && hi - lo > std::numeric_limits<Scalar>::epsilon() * hi; ++it) {
    const Scalar mid = (lo + hi) / 2;
    const Scalar f_mid = scalar_residual(mid);
    if ((f_mid < 0) == (f_lo < 0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  const Scalar c = std::abs(scalar_residual(lo)) < std::abs(scalar_residual(hi)) ? lo : hi;
  return std::make_pair(c, gauge(c));
}

template <typename Scalar>
struct Endpoint {
  Field<Scalar> field;
  Scalar scale = 1;
};

/// Doubles T from 1 until I(T·seed) < 0.
template <typename Scalar, typename Derived>
Endpoint<Scalar> find_endpoint(const RadialGrid<Scalar>& grid, const Params& params,
                               const Eigen::MatrixBase<Derived>& seed, const MPConfig& config = {}) {
  check_on_grid(grid, seed, "find_endpoint");
  const Field<Scalar> base = seed;
  if (!(base.maxCoeff() > 0)) throw DomainError("find_endpoint: seed has no positive part");
  for (Scalar scale = 1; scale <= Scalar(config.endpoint_scale_max); scale *= 2) {
    const Field<Scalar> candidate = scale * base;
    if (energy(grid, params, candidate).total < 0) return {candidate, scale};
  }
  throw SolverError(SolverFailure::NoNegativeEndpoint,
                    "I(T seed) >= 0 for all T <= " + std::to_string(config.endpoint_scale_max));
}

namespace detail {

template <typename Scalar>
struct RayPath {
  std::vector<Field<Scalar>> nodes;
  std::vector<Scalar> levels;
  int top = 0;
};

// Straight path 0 -> T·direction with T doubled until I < 0 at the far end,
// then the highest interior node is moved to the energy maximum between its
// neighbours by golden section.
template <typename Scalar>
std::optional<RayPath<Scalar>> ray_path(const RadialGrid<Scalar>& grid, const Params& params,
                                        const Field<Scalar>& direction, const MPConfig& config) {
  auto level = [&](const Field<Scalar>& u) { return energy(grid, params, u).total; };
  Scalar scale = 1;
  while (!(level(scale * direction) < 0)) {
    scale *= 2;
    if (scale > Scalar(config.endpoint_scale_max)) return std::nullopt;
  }
  const int points = config.path_points;
  RayPath<Scalar> path;
  path.nodes.resize(points + 1);
  path.levels.resize(points + 1);
  for (int k = 0; k <= points; ++k) {
    path.nodes[k] = (scale * Scalar(k) / Scalar(points)) * direction;
    path.levels[k] = level(path.nodes[k]);
  }
  const int top = int(std::max_element(path.levels.begin() + 1, path.levels.end() - 1) - path.levels.begin());

  const Scalar ratio = (std::sqrt(Scalar(5)) - 1) / 2;
  const Scalar spacing = scale / Scalar(points);
  auto along = [&](Scalar t) -> Field<Scalar> { return (Scalar(top) * spacing + t * spacing) * direction; };
  Scalar a = -1, b = 1;
  Scalar x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
  Scalar f1 = level(along(x1)), f2 = level(along(x2));
  for (int it = 0; it < 40; ++it) {
    if (f1 > f2) {
      b = x2; x2 = x1; f2 = f1; x1 = b - ratio * (b - a); f1 = level(along(x1));
    } else {
      a = x1; x1 = x2; f1 = f2; x2 = a + ratio * (b - a); f2 = level(along(x2));
    }
  }
  Field<Scalar> best = along((a + b) / 2);
  const Scalar best_level = level(best);
  if (best_level > path.levels[top]) {
    path.nodes[top] = std::move(best);
    path.levels[top] = best_level;
  }
  path.top = top;
  return path;
}

}  // namespace detail

/// Mountain-pass search from 0 to T·seed followed by Newton refinement.
///
/// The path is the straight segment from 0 to a negative-energy endpoint on a
/// ray.  Each outer iteration places the highest interior node at the energy
/// maximum between its neighbours, takes one descent step from it along the
/// H¹-preconditioned gradient (L + m0²)⁻¹ ∇_W I, and re-splines the path as
/// the ray through the moved node.  A step is kept only if it lowers the
/// maximum of the path; otherwise it is halved.
template <typename Scalar, typename Derived>
SolveReport<Scalar> mountain_pass(const RadialGrid<Scalar>& grid, const Params& params,
                                  const Eigen::MatrixBase<Derived>& seed, const MPConfig& config = {}) {
  params.validate();
  config.validate();
  if (std::abs(params.omega) >= params.m0)
    throw SolverError(SolverFailure::Refused,
                      "mountain-pass existence requires |omega| < m0 (got omega = " +
                          std::to_string(params.omega) + ", m0 = " + std::to_string(params.m0) + ")");

  const auto endpoint = find_endpoint(grid, params, seed, config);
  auto path = detail::ray_path(grid, params, endpoint.field, config);
  if (!path) throw SolverError(SolverFailure::NoNegativeEndpoint, "initial path has no negative endpoint");

  const Scalar m0_sq = Scalar(params.m0 * params.m0);
  const auto preconditioner = assemble(grid, Field<Scalar>::Constant(grid.size(), m0_sq));

  SolveReport<Scalar> report;
  Scalar step = Scalar(config.descent_step);
  int iteration = 0;
  for (; iteration < config.max_outer_iters; ++iteration) {
    const Field<Scalar>& current = path->nodes[path->top];
    const Scalar current_level = path->levels[path->top];
    const Field<Scalar> gauge = solve_gauge(grid, params, current).v;
    const Field<Scalar> g = grad_energy_with_gauge(grid, params, current, gauge);
    const Scalar grad_norm = std::sqrt(l2_norm_sq(grid, g));
    report.level_history.push_back(current_level);
    if (grad_norm <= Scalar(config.grad_tol)) {
      report.path_converged = true;
      break;
    }
    const Field<Scalar> direction = solve(preconditioner, g);

    bool moved = false;
    for (int halving = 0; halving < 30; ++halving, step /= 2) {
      const Field<Scalar> trial = current - step * direction;
      auto candidate = detail::ray_path(grid, params, trial, config);
      if (candidate && candidate->levels[candidate->top] < current_level) {
        path = std::move(candidate);
        step = std::min(Scalar(config.descent_step), step * Scalar(1.5));
        moved = true;
        break;
      }
    }
    if (!moved) break;  // descent stalled at rounding level
  }
  report.path_iterations = iteration;

  const Field<Scalar> candidate = path->nodes[path->top];
  const Scalar path_level = path->levels[path->top];
  const Field<Scalar> candidate_gauge = solve_gauge(grid, params, candidate).v;

  SolveReport<Scalar> refined;
  try {
    refined = newton_refine(grid, params, candidate, candidate_gauge);
  } catch (const SolverError& error) {
    std::vector<double> history(report.level_history.begin(), report.level_history.end());
    throw SolverError(SolverFailure::NoConvergence,
                      std::string("refinement of the path maximum failed (") + error.what() + ")",
                      std::move(history));
  }
  refined.path_level = path_level;
  refined.path_iterations = report.path_iterations;
  refined.path_converged = report.path_converged;
  refined.level_history = std::move(report.level_history);
  if (!refined.accepted()) {
    std::vector<double> history(refined.level_history.begin(), refined.level_history.end());
    throw SolverError(SolverFailure::NoConvergence,
                      "refined candidate rejected (residuals " + std::to_string(double(refined.residual1)) +
                          ", " + std::to_string(double(refined.residual2)) + ", min u " +
                          std::to_string(double(refined.min_u)) + ")",
                      std::move(history));
  }
  return refined;
}

/// Default seed: the bubble B_0.2 centred at the pole.
template <typename Scalar>
Field<Scalar> default_seed(const RadialGrid<Scalar>& grid) {
  Field<Scalar> seed = bubble(grid, BubbleSpec{0.2, grid.geometry.n});
  if (grid.dirichlet_outer()) seed.array() -= seed[grid.size() - 1];
  return seed;
}

}  // namespace kgmp
