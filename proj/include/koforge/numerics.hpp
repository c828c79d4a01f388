#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace koforge {

using RealFn = std::function<double(double)>;

// Log-spaced sampling grid used by every sampled decision.
struct LogGrid {
  double lo = 1e-6;
  double hi = 1e6;
  int points = 2048;

  std::vector<double> nodes() const;
};

// Adaptive Gauss-Kronrod (15 point) on a finite interval.
double integrate(const RealFn& f, double a, double b, double rel_tol = 1e-13);

// Double-exponential rule; tolerates integrable endpoint singularities.
double integrate_singular(const RealFn& f, double a, double b, double rel_tol = 1e-12);

// Root of an increasing or decreasing f on [lo, hi] with f(lo) f(hi) <= 0.
double bracket_root(const RealFn& f, double lo, double hi, double x_tol_rel = 1e-15);

// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

// Least-squares coefficients (a, b) of y ~ a x + b z + c.
std::pair<double, double> fit_two_slopes(std::span<const double> x, std::span<const double> z,
                                         std::span<const double> y);

}  // namespace koforge
