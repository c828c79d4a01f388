#include "koforge/tabulated.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "koforge/error.hpp"

namespace koforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Safeguarded Newton for an increasing residual r on [lo, hi] with r(lo) <= 0 <= r(hi).
template <class Residual, class Slope>
double newton_bracketed(Residual r, Slope dr, double lo, double hi, double guess, double scale) {
  double t = std::clamp(guess, lo, hi);
  for (int it = 0; it < 100; ++it) {
    double val = r(t);
    if (std::abs(val) <= 4e-16 * scale) return t;
    if (val < 0) lo = t;
    else hi = t;
    double d = dr(t);
    double next = (d > 0 && std::isfinite(d)) ? t - val / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 4e-16 * std::abs(t) || hi - lo <= 4e-16 * std::abs(hi)) return next;
    t = next;
  }
  return t;
}

}  // namespace

struct MonotoneMap::Impl {
  RealFn g;
  double lower;
  MapOptions opts;
  double ratio;
  mutable std::shared_mutex mu;
  std::vector<double> t, v, gv;
  bool exhausted = false;

  // Appends one octave of knots; caller holds the exclusive lock.
  void grow() {
    for (int i = 0; i < opts.knots_per_octave && !exhausted; ++i) {
      double a = t.back(), b = a * ratio;
      if (b > opts.max_t) {
        exhausted = true;
        break;
      }
      double seg;
      try {
        seg = integrate(g, a, b, opts.rel_tol);
      } catch (const NumericalError&) {
        exhausted = true;
        break;
      }
      double nv = v.back() + seg;
      if (!std::isfinite(nv)) {
        exhausted = true;
        break;
      }
      t.push_back(b);
      v.push_back(nv);
      gv.push_back(g(b));
    }
  }

  bool covers_t(double x) const { return t.back() >= x; }
  bool covers_v(double y) const { return v.back() >= y; }
};

MonotoneMap::MonotoneMap(RealFn integrand, double lower, MapOptions opts) : impl_(std::make_shared<Impl>()) {
  if (!(lower >= 0.0)) throw PreconditionError("monotone map lower limit must be >= 0");
  impl_->g = std::move(integrand);
  impl_->lower = lower;
  impl_->opts = opts;
  impl_->ratio = std::exp2(1.0 / opts.knots_per_octave);
  if (lower == 0.0) {
    impl_->t.push_back(opts.first_knot);
    impl_->v.push_back(integrate_singular(impl_->g, 0.0, opts.first_knot));
  } else {
    impl_->t.push_back(lower);
    impl_->v.push_back(0.0);
  }
  impl_->gv.push_back(impl_->g(impl_->t.front()));
}

void MonotoneMap::extend_to(double x) const {
  {
    std::shared_lock lk(impl_->mu);
    if (impl_->covers_t(x) || impl_->exhausted) return;
  }
  std::unique_lock lk(impl_->mu);
  while (!impl_->covers_t(x) && !impl_->exhausted) impl_->grow();
}

double MonotoneMap::forward(double x) const {
  const Impl& m = *impl_;
  if (x < m.lower) throw PreconditionError("monotone map evaluated below its lower limit");
  if (x == m.lower) return 0.0;
  if (m.lower == 0.0 && x <= m.opts.first_knot) return integrate_singular(m.g, 0.0, x);
  extend_to(x);
  double tk, vk;
  {
    std::shared_lock lk(m.mu);
    if (!m.covers_t(x))
      throw NumericalError("monotone map cannot be tabulated up to t=" + std::to_string(x));
    std::size_t k = std::upper_bound(m.t.begin(), m.t.end(), x) - m.t.begin() - 1;
    tk = m.t[k];
    vk = m.v[k];
  }
  return vk + integrate(m.g, tk, x, m.opts.rel_tol);
}

double MonotoneMap::inverse(double y) const {
  const Impl& m = *impl_;
  if (y < 0.0) throw PreconditionError("inverse of monotone map requested for y < 0");
  if (y == 0.0) return m.lower;
  {
    std::shared_lock lk(m.mu);
    if (!m.covers_v(y) && m.exhausted)
      throw NumericalError("value " + std::to_string(y) + " exceeds the tabulated range of the map");
  }
  {
    std::unique_lock lk(impl_->mu);
    while (!impl_->covers_v(y) && !impl_->exhausted) impl_->grow();
    if (!impl_->covers_v(y))
      throw NumericalError("value " + std::to_string(y) + " exceeds the tabulated range of the map");
  }
  double lo, hi, base, vhi;
  bool head = false;
  {
    std::shared_lock lk(m.mu);
    if (y < m.v.front()) {
      head = true;
      lo = 0.0;
      hi = m.t.front();
      base = 0.0;
      vhi = m.v.front();
    } else {
      std::size_t k = std::upper_bound(m.v.begin(), m.v.end(), y) - m.v.begin() - 1;
      if (k + 1 >= m.v.size()) return m.t[k];
      lo = m.t[k];
      hi = m.t[k + 1];
      base = m.v[k];
      vhi = m.v[k + 1];
    }
  }
  const double tk = lo;
  auto residual = [&](double x) {
    double seg = head ? integrate_singular(m.g, 0.0, x) : integrate(m.g, tk, x, m.opts.rel_tol);
    return base + seg - y;
  };
  double guess = lo + (hi - lo) * (y - base) / (vhi - base);
  return newton_bracketed(residual, m.g, lo, hi, guess, std::max(1.0, y));
}

namespace {

// Hermite cubic on [0, 1] with end values y0, y1 and end slopes m0, m1 (per unit u).
struct Cubic {
  double y0, y1, m0, m1;
  double operator()(double u) const {
    double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * m1;
  }
  double slope(double u) const {
    double u2 = u * u;
    return (6 * u2 - 6 * u) * y0 + (3 * u2 - 4 * u + 1) * m0 + (-6 * u2 + 6 * u) * y1 + (3 * u2 - 2 * u) * m1;
  }
};

// Interval k in log-log form when both values are positive, else linear-space form.
struct Piece {
  bool loglog;
  double x0, x1;
  Cubic c;
};

Piece make_piece(const std::vector<double>& t, const std::vector<double>& v, const std::vector<double>& g,
                 std::size_t k) {
  Piece p;
  p.loglog = v[k] > 0.0 && g[k] > 0.0 && g[k + 1] > 0.0 && std::isfinite(g[k]) && std::isfinite(g[k + 1]);
  if (p.loglog) {
    p.x0 = std::log(t[k]);
    p.x1 = std::log(t[k + 1]);
    double h = p.x1 - p.x0;
    p.c = {std::log(v[k]), std::log(v[k + 1]), h * t[k] * g[k] / v[k], h * t[k + 1] * g[k + 1] / v[k + 1]};
  } else {
    p.x0 = t[k];
    p.x1 = t[k + 1];
    double h = p.x1 - p.x0;
    double g0 = std::isfinite(g[k]) ? g[k] : 0.0, g1 = std::isfinite(g[k + 1]) ? g[k + 1] : 0.0;
    p.c = {v[k], v[k + 1], h * g0, h * g1};
  }
  return p;
}

}  // namespace

double MonotoneMap::forward_interp(double x) const {
  const Impl& m = *impl_;
  if (x < m.lower) throw PreconditionError("monotone map evaluated below its lower limit");
  if (x == m.lower) return 0.0;
  extend_to(x);
  std::shared_lock lk(m.mu);
  if (!m.covers_t(x)) throw NumericalError("monotone map cannot be tabulated up to t=" + std::to_string(x));
  if (x < m.t.front()) {
    // head segment [0, first_knot]: local power law through the first knot
    double d = m.t.front() * m.gv.front() / m.v.front();
    return m.v.front() * std::pow(x / m.t.front(), d);
  }
  std::size_t k = std::upper_bound(m.t.begin(), m.t.end(), x) - m.t.begin() - 1;
  if (k + 1 >= m.t.size()) return m.v[k];
  Piece p = make_piece(m.t, m.v, m.gv, k);
  double X = p.loglog ? std::log(x) : x;
  double val = p.c((X - p.x0) / (p.x1 - p.x0));
  return std::clamp(p.loglog ? std::exp(val) : val, m.v[k], m.v[k + 1]);
}

double MonotoneMap::inverse_interp(double y) const {
  const Impl& m = *impl_;
  if (y < 0.0) throw PreconditionError("inverse of monotone map requested for y < 0");
  if (y == 0.0) return m.lower;
  {
    std::unique_lock lk(impl_->mu);
    while (!impl_->covers_v(y) && !impl_->exhausted) impl_->grow();
    if (!impl_->covers_v(y))
      throw NumericalError("value " + std::to_string(y) + " exceeds the tabulated range of the map");
  }
  std::shared_lock lk(m.mu);
  if (y < m.v.front()) {
    double d = m.t.front() * m.gv.front() / m.v.front();
    return m.t.front() * std::pow(y / m.v.front(), 1.0 / d);
  }
  std::size_t k = std::upper_bound(m.v.begin(), m.v.end(), y) - m.v.begin() - 1;
  if (k + 1 >= m.v.size()) return m.t[k];
  Piece p = make_piece(m.t, m.v, m.gv, k);
  const double Y = p.loglog ? std::log(y) : y;
  auto r = [&](double u) { return p.c(u) - Y; };
  auto dr = [&](double u) { return p.c.slope(u); };
  double lo = 0.0, hi = 1.0;
  double guess = (Y - p.c.y0) / (p.c.y1 - p.c.y0);
  double u = newton_bracketed(r, dr, lo, hi, std::isfinite(guess) ? guess : 0.5, std::max(1.0, std::abs(Y)));
  double X = p.x0 + u * (p.x1 - p.x0);
  return std::clamp(p.loglog ? std::exp(X) : X, m.t[k], m.t[k + 1]);
}

double MonotoneMap::integrand(double x) const { return impl_->g(x); }
double MonotoneMap::lower() const { return impl_->lower; }
double MonotoneMap::t_cap() const {
  std::shared_lock lk(impl_->mu);
  return impl_->t.back();
}
double MonotoneMap::value_at_cap() const {
  std::shared_lock lk(impl_->mu);
  return impl_->v.back();
}
std::vector<std::pair<double, double>> MonotoneMap::knots() const {
  std::shared_lock lk(impl_->mu);
  std::vector<std::pair<double, double>> out;
  out.reserve(impl_->t.size());
  for (std::size_t i = 0; i < impl_->t.size(); ++i) out.emplace_back(impl_->t[i], impl_->v[i]);
  return out;
}

TailMap::TailMap(RealFn integrand, double lower, TailOptions opts) : h_(std::move(integrand)), tol_(opts.rel_tol) {
  if (!(lower > 0.0)) throw PreconditionError("tail map lower limit must be > 0");
  const double ratio = std::exp2(1.0 / opts.knots_per_octave);
  const int kpo = opts.knots_per_octave;
  std::vector<double> seg;
  std::vector<double> hv;
  s_.push_back(lower);
  hv.push_back(h_(lower));
  if (!(hv.back() > 0.0) || !std::isfinite(hv.back()))
    throw NumericalError("tail integrand is not positive and finite at s=" + std::to_string(lower));
  double sum = 0.0;
  double far = kInf;
  while (true) {
    double a = s_.back(), b = a * ratio;
    if (b > opts.max_s) break;
    double hb = h_(b);
    if (!(hb > 0.0) || !std::isfinite(hb)) break;
    double piece;
    try {
      piece = integrate(h_, a, b, tol_);
    } catch (const NumericalError&) {
      break;
    }
    s_.push_back(b);
    hv.push_back(hb);
    seg.push_back(piece);
    sum += piece;
    const std::size_t n = s_.size();
    if (n > static_cast<std::size_t>(2 * kpo) && (n - 1) % kpo == 0) {
      slope_ = std::log(hv[n - 1] / hv[n - 1 - kpo]) / std::log(2.0);
      far = slope_ < -1.0 ? hv[n - 1] * s_[n - 1] / (-slope_ - 1.0) : kInf;
      if (far <= opts.rel_stop * sum) break;
    }
  }
  const std::size_t n = s_.size();
  if (n <= static_cast<std::size_t>(kpo))
    throw NumericalError("tail integrand could not be tabulated beyond s=" + std::to_string(s_.back()));
  slope_ = std::log(hv[n - 1] / hv[n - 1 - kpo]) / std::log(2.0);
  if (!(slope_ < -1.0))
    throw NumericalError("tail integrand is not summable: local exponent " + std::to_string(slope_) +
                         " at s=" + std::to_string(s_.back()));
  far = hv[n - 1] * s_[n - 1] / (-slope_ - 1.0);
  psi_.assign(n, 0.0);
  psi_[n - 1] = far;
  for (std::size_t k = n - 1; k-- > 0;) psi_[k] = psi_[k + 1] + seg[k];
}

double TailMap::operator()(double s) const {
  if (s < s_.front()) throw PreconditionError("tail map evaluated below its lower limit");
  if (s >= s_.back()) return psi_.back() * std::pow(s / s_.back(), slope_ + 1.0);
  std::size_t k = std::upper_bound(s_.begin(), s_.end(), s) - s_.begin() - 1;
  return psi_[k + 1] + integrate(h_, s, s_[k + 1], tol_);
}

double TailMap::inverse(double tau) const {
  if (tau > psi_.front() * (1 + 1e-14))
    throw PreconditionError("tail value exceeds the total integral");
  if (tau >= psi_.front()) return s_.front();
  if (tau <= 0.0) return kInf;
  if (tau <= psi_.back()) return s_.back() * std::pow(tau / psi_.back(), 1.0 / (slope_ + 1.0));
  // psi_ is decreasing; find k with psi_[k] >= tau > psi_[k+1].
  std::size_t k = std::upper_bound(psi_.begin(), psi_.end(), tau, std::greater<double>()) - psi_.begin() - 1;
  const double lo = s_[k], hi = s_[k + 1], base = psi_[k + 1];
  // residual increasing in s: tau - tail(s)
  auto residual = [&](double s) { return tau - (base + integrate(h_, s, hi, tol_)); };
  double guess = lo + (hi - lo) * (psi_[k] - tau) / (psi_[k] - base);
  return newton_bracketed(residual, h_, lo, hi, guess, tau);
}

}  // namespace koforge
