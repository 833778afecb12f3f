#pragma once

// Finite-volume realization of Δ_g + potential (Δ_g = -div_g ∇) on a RadialGrid.
//
//   (Lu)_i = -(1/W_i) [κ_{i+1/2}(u_{i+1} - u_i) - κ_{i-1/2}(u_i - u_{i-1})] + V_i u_i,
//   κ_{i+1/2} = A_{i+1/2} / (r_{i+1} - r_i).
//
// No flux crosses r = 0 or r = π, which encodes radial smoothness at the
// poles.  On a ball the last row is replaced by the Dirichlet condition u_N = 0.
// The second-order part is symmetric for ⟨a, b⟩_W = Σ W_i a_i b_i.

#include <cmath>
#include <limits>

#include "kgmp/model.hpp"

namespace kgmp {

template <typename Scalar>
class DiscreteOperator {
 public:
  DiscreteOperator() = default;

  DiscreteOperator(const RadialGrid<Scalar>& grid, Field<Scalar> potential)
      : weights_(grid.cell_weights),
        potential_(std::move(potential)),
        dirichlet_outer_(grid.dirichlet_outer()) {
    const Eigen::Index faces = grid.intervals();
    conductance_.resize(faces);
    for (Eigen::Index f = 0; f < faces; ++f)
      conductance_[f] = grid.face_weights[f] / grid.spacing(f);

    const Eigen::Index count = grid.size();
    sub_ = Field<Scalar>::Zero(count);
    diag_ = potential_;
    super_ = Field<Scalar>::Zero(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      if (i + 1 < count) {
        super_[i] = -conductance_[i] / weights_[i];
        diag_[i] += conductance_[i] / weights_[i];
      }
      if (i > 0) {
        sub_[i] = -conductance_[i - 1] / weights_[i];
        diag_[i] += conductance_[i - 1] / weights_[i];
      }
    }
    if (dirichlet_outer_) {
      sub_[count - 1] = 0;
      diag_[count - 1] = 1;
    }
  }

  Eigen::Index size() const { return weights_.size(); }
  bool dirichlet_outer() const { return dirichlet_outer_; }

  // Tridiagonal coefficients of row i: sub(i) multiplies u_{i-1}, super(i) u_{i+1}.
  const Field<Scalar>& sub() const { return sub_; }
  const Field<Scalar>& diag() const { return diag_; }
  const Field<Scalar>& super() const { return super_; }
  const Field<Scalar>& potential() const { return potential_; }
  const Field<Scalar>& conductance() const { return conductance_; }
  const Field<Scalar>& weights() const { return weights_; }

  /// Second-order part only, evaluated in flux form so that constants map to 0 exactly.
  template <typename Derived>
  Field<Scalar> laplacian(const Eigen::MatrixBase<Derived>& u) const {
    const Eigen::Index count = size();
    Field<Scalar> out = Field<Scalar>::Zero(count);
    for (Eigen::Index f = 0; f + 1 < count; ++f) {
      const Scalar flux = conductance_[f] * (u[f + 1] - u[f]);
      out[f] -= flux;
      out[f + 1] += flux;
    }
    out.array() /= weights_.array();
    return out;
  }

 private:
  Field<Scalar> weights_;
  Field<Scalar> conductance_;
  Field<Scalar> potential_;
  Field<Scalar> sub_, diag_, super_;
  bool dirichlet_outer_ = false;
};

template <typename Scalar, typename Derived>
DiscreteOperator<Scalar> assemble(const RadialGrid<Scalar>& grid,
                                  const Eigen::MatrixBase<Derived>& potential) {
  check_on_grid(grid, potential, "assemble");
  return DiscreteOperator<Scalar>(grid, potential.template cast<Scalar>());
}

template <typename Scalar>
DiscreteOperator<Scalar> assemble_laplacian(const RadialGrid<Scalar>& grid) {
  return DiscreteOperator<Scalar>(grid, Field<Scalar>::Zero(grid.size()));
}

template <typename Scalar, typename Derived>
Field<Scalar> apply(const DiscreteOperator<Scalar>& op, const Eigen::MatrixBase<Derived>& u) {
  if (u.size() != op.size()) throw GridMismatch("apply: field does not match operator");
  Field<Scalar> out = op.laplacian(u);
  out.array() += op.potential().array() * u.array();
  if (op.dirichlet_outer()) out[op.size() - 1] = u[op.size() - 1];
  return out;
}

/// Thomas elimination for op x = rhs.
///
/// Valid operators (nonnegative potential, not identically zero, or a ball)
/// are M-matrices whose pivots stay positive; a pivot below the tolerance is
/// reported as SolverFailure::NotInvertible.
template <typename Scalar, typename Derived>
Field<Scalar> solve(const DiscreteOperator<Scalar>& op, const Eigen::MatrixBase<Derived>& rhs) {
  const Eigen::Index count = op.size();
  if (rhs.size() != count) throw GridMismatch("solve: right-hand side does not match operator");
  const auto& a = op.sub();
  const auto& b = op.diag();
  const auto& c = op.super();

  const Scalar tolerance = std::sqrt(std::numeric_limits<Scalar>::epsilon());
  Field<Scalar> c_prime(count), d_prime(count);
  Scalar pivot = b[0];
  auto check = [&](Eigen::Index row) {
    const Scalar scale = std::abs(b[row]) + std::abs(a[row]) + std::abs(c[row]);
    if (!(pivot > tolerance * scale))
      throw SolverError(SolverFailure::NotInvertible,
                        "pivot " + std::to_string(double(pivot)) + " at row " + std::to_string(row));
  };
  check(0);
  c_prime[0] = c[0] / pivot;
  d_prime[0] = rhs[0] / pivot;
  for (Eigen::Index i = 1; i < count; ++i) {
    pivot = b[i] - a[i] * c_prime[i - 1];
    check(i);
    c_prime[i] = c[i] / pivot;
    d_prime[i] = (rhs[i] - a[i] * d_prime[i - 1]) / pivot;
  }
  Field<Scalar> x(count);
  x[count - 1] = d_prime[count - 1];
  for (Eigen::Index i = count - 1; i-- > 0;) x[i] = d_prime[i] - c_prime[i] * x[i + 1];
  return x;
}

/// Σ_faces A_{i+1/2}(u_{i+1} - u_i)² / (r_{i+1} - r_i), the discrete ∫|∇u|².
template <typename Scalar, typename Derived>
Scalar dirichlet_energy(const RadialGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& u) {
  check_on_grid(grid, u, "dirichlet_energy");
  Scalar total = 0;
  for (Eigen::Index f = 0; f < grid.intervals(); ++f) {
    const Scalar jump = u[f + 1] - u[f];
    total += grid.face_weights[f] * jump * jump / grid.spacing(f);
  }
  return total;
}

/// Discrete H¹ norm squared: dirichlet_energy + weighted L².
template <typename Scalar, typename Derived>
Scalar h1_norm_sq(const RadialGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& u) {
  return dirichlet_energy(grid, u) + l2_norm_sq(grid, u);
}

}  // namespace kgmp
