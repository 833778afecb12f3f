#pragma once

// Physical parameters, radial model geometries and their quadrature.
//
// Every field in this library is radial about a pole (the north pole of S^n or
// the centre of a ball), so a function on the manifold is a vector of samples
// at the geodesic radii of a RadialGrid.  Integrals over the manifold are
// weighted sums with the grid's dual-cell volumes.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "kgmp/errors.hpp"

namespace kgmp {

template <typename Scalar>
using Field = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Constants of the electrostatic Klein-Gordon-Maxwell-Proca system
///   Δu + m0² u = u^(p-1) + ω²(1 - q v)² u,
///   Δv + (m1² + q² u²) v = q u².
struct Params {
  int n = 3;
  double p = 4.0;
  double m0 = 1.0;
  double m1 = 1.0;
  double q = 1.0;
  double omega = 0.0;

  double critical_exponent() const { return 2.0 * n / (n - 2.0); }

  /// Throws DomainError unless n >= 3, 2 < p <= 2*, m0, m1, q > 0.
  void validate() const {
    if (n < 3) throw DomainError("Params: dimension n must be >= 3");
    if (!(p > 2.0) || p > critical_exponent() * (1.0 + 1e-14))
      throw DomainError("Params: exponent p must lie in (2, 2n/(n-2)]");
    if (!(m0 > 0.0) || !(m1 > 0.0) || !(q > 0.0))
      throw DomainError("Params: m0, m1 and q must be positive");
    if (!std::isfinite(omega)) throw DomainError("Params: omega must be finite");
  }

  /// Params with p set to the critical exponent 2n/(n-2).
  static Params critical(int n, double m0, double m1, double q, double omega) {
    Params params{n, 2.0 * n / (n - 2.0), m0, m1, q, omega};
    params.validate();
    return params;
  }
};

enum class GeometryKind { SphereN, EuclideanBall };

struct Geometry {
  GeometryKind kind = GeometryKind::SphereN;
  int n = 3;
  double r_max = std::numbers::pi;

  static Geometry sphere(int n) { return validated({GeometryKind::SphereN, n, std::numbers::pi}); }
  static Geometry ball(int n, double radius) {
    return validated({GeometryKind::EuclideanBall, n, radius});
  }

  bool is_sphere() const { return kind == GeometryKind::SphereN; }

  /// Scalar curvature of the model: n(n-1) on the round sphere, 0 on the ball.
  double scalar_curvature() const { return is_sphere() ? n * (n - 1.0) : 0.0; }

  void validate() const {
    if (n < 2) throw DomainError("Geometry: dimension must be >= 2");
    if (is_sphere()) {
      if (!(r_max > 0.0) || r_max > std::numbers::pi)
        throw DomainError("Geometry: sphere radius range must lie in (0, pi]");
    } else if (!(r_max > 0.0)) {
      throw DomainError("Geometry: ball radius must be positive");
    }
  }

 private:
  static Geometry validated(Geometry g) {
    g.validate();
    return g;
  }
};

/// Area of the unit k-sphere, 2π^((k+1)/2) / Γ((k+1)/2).
template <typename Scalar = double>
Scalar sphere_area(int k) {
  if (k < 1) throw DomainError("sphere_area: k must be >= 1");
  using std::pow;
  using std::tgamma;
  const Scalar half = Scalar(k + 1) / Scalar(2);
  return Scalar(2) * pow(std::numbers::pi_v<Scalar>, half) / tgamma(half);
}

/// Radial density of the volume form, without the ω_{n-1} factor.
template <typename Scalar>
Scalar metric_density(const Geometry& geometry, Scalar r) {
  using std::pow;
  using std::sin;
  const Scalar base = geometry.is_sphere() ? sin(r) : r;
  return pow(base, geometry.n - 1);
}

/// Exact volume of the model manifold.
template <typename Scalar = double>
Scalar model_volume(const Geometry& geometry) {
  if (geometry.is_sphere() && geometry.r_max == std::numbers::pi)
    return sphere_area<Scalar>(geometry.n);
  if (!geometry.is_sphere())
    return sphere_area<Scalar>(geometry.n - 1) * std::pow(Scalar(geometry.r_max), geometry.n) /
           Scalar(geometry.n);
  // Geodesic cap of S^n: fall back to fine quadrature.
  const int pieces = 4096;
  Scalar total = 0;
  const Scalar h = Scalar(geometry.r_max) / pieces;
  for (int i = 0; i < pieces; ++i) {
    const Scalar a = i * h, b = (i + 1) * h;
    const Scalar m = (a + b) / 2;
    total += h / 6 * (metric_density(geometry, a) + 4 * metric_density(geometry, m) +
                      metric_density(geometry, b));
  }
  return sphere_area<Scalar>(geometry.n - 1) * total;
}

/// Geodesic-polar mesh r_0 = 0 < r_1 < ... < r_N = r_max.
///
/// Node i owns the dual cell [r_{i-1/2}, r_{i+1/2}] (clipped to [0, r_max]);
/// cell_weights[i] is ω_{n-1}∫ w(r) dr over that cell.  face_weights[i] is the
/// area ω_{n-1} w(r_{i+1/2}) of the sphere between nodes i and i+1.
template <typename Scalar>
struct RadialGrid {
  Geometry geometry;
  Field<Scalar> nodes;
  Field<Scalar> cell_weights;
  Field<Scalar> face_weights;

  Eigen::Index size() const { return nodes.size(); }
  Eigen::Index intervals() const { return nodes.size() - 1; }
  Scalar spacing(Eigen::Index face) const { return nodes[face + 1] - nodes[face]; }
  Scalar midpoint(Eigen::Index face) const { return (nodes[face + 1] + nodes[face]) / 2; }
  Scalar volume() const { return cell_weights.sum(); }
  bool dirichlet_outer() const { return !geometry.is_sphere(); }
  bool matches(Eigen::Index length) const { return length == nodes.size(); }
};

using RadialGridd = RadialGrid<double>;
using Fieldd = Field<double>;

namespace detail {

// 5-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 5> kGaussNodes = {
    -0.9061798459386639927976269, -0.5384693101056830910363144, 0.0,
    0.5384693101056830910363144, 0.9061798459386639927976269};
inline constexpr std::array<double, 5> kGaussWeights = {
    0.2369268850561890875142640, 0.4786286704993664680412915, 0.5688888888888888888888889,
    0.4786286704993664680412915, 0.2369268850561890875142640};

template <typename Scalar>
Scalar gauss_density(const Geometry& geometry, Scalar a, Scalar b) {
  const Scalar half = (b - a) / 2, centre = (a + b) / 2;
  Scalar total = 0;
  for (std::size_t k = 0; k < kGaussNodes.size(); ++k)
    total += Scalar(kGaussWeights[k]) * metric_density(geometry, centre + half * Scalar(kGaussNodes[k]));
  return half * total;
}

}  // namespace detail

/// Builds the graded mesh r_i = r_max (i/N)^grading with Gauss-Legendre cell weights.
template <typename Scalar = double>
RadialGrid<Scalar> build_grid(const Geometry& geometry, int intervals, double grading = 1.0) {
  geometry.validate();
  if (intervals < 8) throw DomainError("build_grid: need at least 8 intervals");
  if (!(grading >= 1.0)) throw DomainError("build_grid: grading must be >= 1");

  RadialGrid<Scalar> grid;
  grid.geometry = geometry;
  const Eigen::Index count = intervals + 1;
  grid.nodes.resize(count);
  const Scalar r_max = Scalar(geometry.r_max);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Scalar s = Scalar(i) / Scalar(intervals);
    grid.nodes[i] = grading == 1.0 ? r_max * s : r_max * std::pow(s, Scalar(grading));
  }
  grid.nodes[0] = 0;
  grid.nodes[intervals] = r_max;

  const Scalar area = sphere_area<Scalar>(geometry.n - 1);
  grid.face_weights.resize(intervals);
  for (Eigen::Index f = 0; f < intervals; ++f)
    grid.face_weights[f] = area * metric_density(geometry, grid.midpoint(f));

  grid.cell_weights.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Scalar lo = i == 0 ? Scalar(0) : grid.midpoint(i - 1);
    const Scalar hi = i == intervals ? r_max : grid.midpoint(i);
    grid.cell_weights[i] = area * detail::gauss_density(geometry, lo, hi);
  }
  return grid;
}

template <typename Scalar, typename Derived>
void check_on_grid(const RadialGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& f,
                   const char* where) {
  if (!grid.matches(f.size()))
    throw GridMismatch(std::string(where) + ": field has " + std::to_string(f.size()) +
                       " samples, grid has " + std::to_string(grid.size()));
}

/// ∫_M f dv_g for a radial f, as Σ W_i f_i.
template <typename Scalar, typename Derived>
Scalar integrate(const RadialGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& f) {
  check_on_grid(grid, f, "integrate");
  return grid.cell_weights.dot(f);
}

/// Weighted inner product ⟨a, b⟩_W = Σ W_i a_i b_i.
template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar weighted_dot(const RadialGrid<Scalar>& grid, const Eigen::MatrixBase<DerivedA>& a,
                    const Eigen::MatrixBase<DerivedB>& b) {
  check_on_grid(grid, a, "weighted_dot");
  check_on_grid(grid, b, "weighted_dot");
  return (grid.cell_weights.array() * a.array() * b.array()).sum();
}

template <typename Scalar, typename Derived>
Scalar l2_norm_sq(const RadialGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& f) {
  return weighted_dot(grid, f, f);
}

/// Samples a callable r -> value at the grid nodes.
template <typename Scalar, typename Fn>
Field<Scalar> sample(const RadialGrid<Scalar>& grid, Fn&& fn) {
  Field<Scalar> out(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) out[i] = fn(grid.nodes[i]);
  return out;
}

/// Index of the node closest to r.
template <typename Scalar>
Eigen::Index nearest_node(const RadialGrid<Scalar>& grid, Scalar r) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < grid.size(); ++i)
    if (std::abs(grid.nodes[i] - r) < std::abs(grid.nodes[best] - r)) best = i;
  return best;
}

/// Piecewise-linear interpolation of f at radius r in [0, r_max].
template <typename Scalar, typename Derived>
Scalar interpolate(const RadialGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& f, Scalar r) {
  check_on_grid(grid, f, "interpolate");
  if (r < 0 || r > grid.nodes[grid.size() - 1])
    throw DomainError("interpolate: radius outside the grid");
  const auto* begin = grid.nodes.data();
  const auto* end = begin + grid.size();
  auto it = std::upper_bound(begin, end, r);
  if (it == end) return f[grid.size() - 1];
  const Eigen::Index hi = it - begin;
  const Eigen::Index lo = hi - 1;
  const Scalar t = (r - grid.nodes[lo]) / (grid.nodes[hi] - grid.nodes[lo]);
  return (1 - t) * f[lo] + t * f[hi];
}

/// Second-order radial derivative on the (possibly graded) mesh; one-sided at both ends.
template <typename Scalar, typename Derived>
Field<Scalar> radial_derivative(const RadialGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& f) {
  check_on_grid(grid, f, "radial_derivative");
  const Eigen::Index count = grid.size();
  const auto& r = grid.nodes;
  Field<Scalar> d(count);
  // Three-point Lagrange derivative at x of the nodes (x0, x1, x2).
  auto lagrange = [](Scalar x, Scalar x0, Scalar x1, Scalar x2, Scalar f0, Scalar f1, Scalar f2) {
    return f0 * (2 * x - x1 - x2) / ((x0 - x1) * (x0 - x2)) +
           f1 * (2 * x - x0 - x2) / ((x1 - x0) * (x1 - x2)) +
           f2 * (2 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
  };
  for (Eigen::Index i = 1; i + 1 < count; ++i)
    d[i] = lagrange(r[i], r[i - 1], r[i], r[i + 1], f[i - 1], f[i], f[i + 1]);
  d[0] = lagrange(r[0], r[0], r[1], r[2], f[0], f[1], f[2]);
  const Eigen::Index l = count - 1;
  d[l] = lagrange(r[l], r[l - 2], r[l - 1], r[l], f[l - 2], f[l - 1], f[l]);
  return d;
}

}  // namespace kgmp
