#include "koforge/numerics.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "koforge/error.hpp"

namespace koforge {

std::vector<double> LogGrid::nodes() const {
  if (!(lo > 0.0) || !(hi > lo) || points < 2)
    throw PreconditionError("log grid needs 0 < lo < hi and at least 2 points");
  std::vector<double> out(points);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < points; ++i) out[i] = std::exp(a + (b - a) * i / (points - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

namespace {

// One 15-point Kronrod panel on [a, b]; err is |K15 - G7| in the units of the integral.
double kronrod_panel(const RealFn& f, double a, double b, double* err) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double e = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      [&](double x) { return f(mid + half * x); }, -1.0, 1.0, 0, 0.0, &e);
  *err = std::abs(e * half);
  return v * half;
}

// Boost's adaptive driver does not rescale the panel error to the subinterval,
// so short intervals are always bisected to full depth; this recursion does.
double adaptive(const RealFn& f, double a, double b, double v, double err, double abs_tol, int depth) {
  const double mid = 0.5 * (a + b);
  if (depth == 0 || err <= abs_tol || !(mid > a && mid < b) || !std::isfinite(v)) return v;
  double e1 = 0.0, e2 = 0.0;
  double v1 = kronrod_panel(f, a, mid, &e1);
  double v2 = kronrod_panel(f, mid, b, &e2);
  if (e1 + e2 <= abs_tol) return v1 + v2;
  return adaptive(f, a, mid, v1, e1, 0.5 * abs_tol, depth - 1) + adaptive(f, mid, b, v2, e2, 0.5 * abs_tol, depth - 1);
}

}  // namespace

double integrate(const RealFn& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  double err = 0.0;
  double v = kronrod_panel(f, a, b, &err);
  v = adaptive(f, a, b, v, err, rel_tol * std::abs(v), 14);
  if (!std::isfinite(v))
    throw NumericalError("quadrature produced a non-finite value on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "]");
  return v;
}

double integrate_singular(const RealFn& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> rule(12);
  double v = 0.0;
  try {
    v = rule.integrate([&f](double x) { return f(x); }, a, b, rel_tol);
  } catch (const std::exception& e) {
    throw NumericalError(std::string("singular quadrature failed: ") + e.what());
  }
  if (!std::isfinite(v)) throw NumericalError("singular quadrature produced a non-finite value");
  return v;
}

double bracket_root(const RealFn& f, double lo, double hi, double x_tol_rel) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0) throw NumericalError("root not bracketed");
  std::uintmax_t iters = 200;
  auto tol = [x_tol_rel](double x, double y) { return std::abs(x - y) <= x_tol_rel * std::max(std::abs(x), std::abs(y)); };
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (r.first + r.second);
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw PreconditionError("fit_slope needs matching arrays of length >= 2");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

std::pair<double, double> fit_two_slopes(std::span<const double> x, std::span<const double> z,
                                         std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 3 || z.size() != n || y.size() != n) throw PreconditionError("fit_two_slopes needs matching arrays of length >= 3");
  double mx = 0, mz = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    mz += z[i];
    my += y[i];
  }
  mx /= n;
  mz /= n;
  my /= n;
  double sxx = 0, sxz = 0, szz = 0, sxy = 0, szy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dz = z[i] - mz, dy = y[i] - my;
    sxx += dx * dx;
    sxz += dx * dz;
    szz += dz * dz;
    sxy += dx * dy;
    szy += dz * dy;
  }
  const double det = sxx * szz - sxz * sxz;
  return {(szz * sxy - sxz * szy) / det, (sxx * szy - sxz * sxy) / det};
}

}  // namespace koforge
