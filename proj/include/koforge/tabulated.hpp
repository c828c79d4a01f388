#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "koforge/numerics.hpp"

namespace koforge {

struct MapOptions {
  int knots_per_octave = 4;
  double first_knot = 0x1p-30;  // head segment [0, first_knot] when the lower limit is 0
  double max_t = 1e300;
  double rel_tol = 1e-13;
};

// t -> integral of a nonnegative integrand from `lower` to t, tabulated on a
// geometric knot grid that is extended lazily (one octave at a time).
// Copies share the knot cache; readers may run concurrently with extension.
class MonotoneMap {
 public:
  explicit MonotoneMap(RealFn integrand, double lower = 0.0, MapOptions opts = {});

  double operator()(double t) const { return forward(t); }
  double forward(double t) const;
  double inverse(double y) const;
  double integrand(double t) const;
  double lower() const;
  double t_cap() const;
  double value_at_cap() const;
  std::vector<std::pair<double, double>> knots() const;
  // Cubic Hermite interpolation of the knot table in log-log coordinates (exact
  // for power laws); no quadrature once the table covers the argument.
  double forward_interp(double t) const;
  double inverse_interp(double y) const;
  // Tabulates up to t (or until the integrand stops being finite).
  void extend_to(double t) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

struct TailOptions {
  int knots_per_octave = 4;
  double rel_stop = 1e-17;  // stop once the extrapolated remainder is this small
  double max_s = 1e250;
  double rel_tol = 1e-12;
};

// s -> integral of a positive integrand from s to infinity, for s >= lower.
// Tabulated right-cumulatively so small tails keep full relative precision;
// beyond the last knot the integrand is extrapolated as a local power law.
class TailMap {
 public:
  TailMap(RealFn integrand, double lower, TailOptions opts = {});

  double operator()(double s) const;
  double total() const { return psi_.front(); }
  // s with tail(s) = tau; may be +inf when tau underflows the extrapolated tail.
  double inverse(double tau) const;
  double horizon() const { return s_.back(); }
  double local_exponent() const { return slope_; }
  double far_tail() const { return psi_.back(); }
  std::size_t size() const { return s_.size(); }

 private:
  RealFn h_;
  double tol_ = 1e-12;
  std::vector<double> s_, psi_;
  double slope_ = -2.0;
};

}  // namespace koforge
