#pragma once

// Reference values and helpers for the tests.  Nothing here calls into the
// library under test: closed forms are written out by hand and the frozen
// numbers come from separate fine-grid computations.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

// Unit sphere areas written out by hand.
inline constexpr double area_s1 = 2 * pi;
inline const double area_s3 = 2 * pi * pi;
inline const double area_s4 = 8 * pi * pi / 3;
inline const double area_s5 = pi * pi * pi;

// Volume of the unit 5-ball: ω_4 / 5.
inline const double ball5_volume = 8 * pi * pi / 15;

// K_3² from n(n-2)ω_n^(2/n)K_n² = 4 with ω_3 = 2π².
inline const double k3_squared = 4.0 / (3.0 * std::pow(2 * pi * pi, 2.0 / 3.0));

// ∫_{R^5} (1 + r²/15)^(-3) dx = ω_4 · 15^(5/2) ∫_0^∞ s⁴/(1+s²)³ ds, and the last
// integral is 3π/16.
inline const double c5_profile_mass = area_s4 * std::pow(15.0, 2.5) * 3 * pi / 16;

// ∫Φ(B_μ)B_μ² / ∫B_μ² for q = m1 = 1, from an independent non-divergence finite
// difference solve (-v'' - (n-1)cot(r) v' + (1 + B²)v = B² on 200000 graded
// intervals), rounded to eight digits.
struct PhaseRatio {
  int n;
  double mu;
  double ratio;
};
inline constexpr PhaseRatio phase_ratios[] = {
    {3, 1e-1, 0.22889579}, {3, 1e-2, 0.04226679}, {3, 1e-3, 0.00476942},
    {5, 1e-1, 0.75391522}, {5, 1e-2, 0.67440662}, {5, 1e-3, 0.78329163},
};

/// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double total = f(a) + f(b);
  for (int i = 1; i < panels; ++i) total += (i % 2 ? 4 : 2) * f(a + i * h);
  return total * h / 3;
}

/// Random smooth radial profile: a random combination of cos(k r) modes,
/// scaled by a log-uniform amplitude in [0.1, 10].
inline Eigen::VectorXd smooth_field(const Eigen::VectorXd& nodes, double r_max, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coefficient(-1.0, 1.0);
  std::uniform_real_distribution<double> exponent(-1.0, 1.0);
  const double scale = std::pow(10.0, exponent(rng));
  double modes[5];
  for (int k = 0; k < 5; ++k) modes[k] = coefficient(rng) / (1.0 + k * k);
  Eigen::VectorXd out(nodes.size());
  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    double value = 0;
    for (int k = 0; k < 5; ++k) value += modes[k] * std::cos(k * pi * nodes[i] / r_max);
    out[i] = scale * value;
  }
  return out;
}

/// Central differences at step t and t/10 combined by Richardson extrapolation
/// (error O(t⁴) for smooth f).
struct Richardson {
  double coarse = 0;  // D(t)
  double fine = 0;    // D(t/10)
  double extrapolated = 0;
};

inline Richardson richardson(const std::function<double(double)>& f, double t) {
  auto central = [&](double h) { return (f(h) - f(-h)) / (2 * h); };
  Richardson out;
  out.coarse = central(t);
  out.fine = central(t / 10);
  out.extrapolated = (100 * out.fine - out.coarse) / 99;
  return out;
}

}  // namespace oracle
