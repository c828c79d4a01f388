#include "koforge/maxprin.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "koforge/error.hpp"
#include "koforge/numerics.hpp"

namespace koforge {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

json opt(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

}  // namespace

double WmpParams::eta() const { return mu + (sigma_growth - 1.0) * (1.0 + delta - chi); }

void WmpParams::validate() const {
  if (!(sigma_growth >= 0.0)) throw PreconditionError("sigma must be >= 0");
  if (!(chi >= 0.0 && chi < delta)) throw PreconditionError("need 0 <= chi < delta");
  if (sigma_growth - eta() < -kBranchTolerance)
    throw PreconditionError("need sigma - eta >= 0, got " + std::to_string(sigma_growth - eta()));
  if (!std::isfinite(d0)) throw PreconditionError("d0 must be finite");
  if (!(A_bound > 0.0)) throw PreconditionError("A must be positive");
}

json WmpParams::to_json() const {
  return {{"sigma_growth", sigma_growth}, {"delta", delta}, {"chi", chi}, {"mu", mu},
          {"d0", d0},                     {"A_bound", A_bound}, {"eta", eta()}};
}

std::string to_string(WmpBranch b) {
  switch (b) {
    case WmpBranch::sigma_zero: return "sigma_zero";
    case WmpBranch::exponential_eta_negative: return "exponential_eta_negative";
    case WmpBranch::exponential_eta_nonnegative: return "exponential_eta_nonnegative";
    case WmpBranch::polynomial_nonpositive: return "polynomial_nonpositive";
    case WmpBranch::polynomial_positive: return "polynomial_positive";
  }
  return "unknown";
}

json WmpConstant::to_json() const { return {{"value", value}, {"branch", to_string(branch)}}; }

WmpConstant wmp_constant(const WmpParams& w) {
  w.validate();
  const double s = w.sigma_growth, eta = w.eta(), gap = s - eta;
  const double A = w.A_bound, dc = w.delta - w.chi;
  WmpConstant c;
  if (s == 0.0) return c;
  if (gap > kBranchTolerance) {
    if (eta < 0.0) {
      c.branch = WmpBranch::exponential_eta_negative;
      c.value = A * w.d0 * std::pow(gap, 1.0 + dc);
    } else {
      c.branch = WmpBranch::exponential_eta_nonnegative;
      c.value = A * w.d0 * std::pow(s, dc) * gap;
    }
    return c;
  }
  const double bracket = w.delta * (s - 1.0) + w.d0 - 1.0;
  if (bracket <= 0.0) {
    c.branch = WmpBranch::polynomial_nonpositive;
    return c;
  }
  c.branch = WmpBranch::polynomial_positive;
  c.value = A * std::pow(s, dc) * bracket;
  return c;
}

namespace {

// log of int_a^b e^g, bisecting until g varies by at most 20 on each piece.
// Pieces sampled below top - 60 are dropped.
double log_segment(const std::function<double(double)>& g, double a, double b, double top, int depth) {
  double lo = kInf, hi = -kInf;
  for (int i = 0; i <= 32; ++i) {
    double v = g(a + (b - a) * i / 32.0);
    if (std::isfinite(v)) lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi < top - 60.0) return -kInf;
  if (hi - lo > 20.0 && depth < 60) {
    double mid = 0.5 * (a + b);
    return log_add(log_segment(g, a, mid, top, depth + 1), log_segment(g, mid, b, top, depth + 1));
  }
  RealFn shifted = [&](double t) { return std::exp(g(t) - hi); };
  double seg = a == 0.0 ? integrate_singular(shifted, 0.0, b) : integrate(shifted, a, b, 1e-12);
  return std::log(seg) + hi;
}

}  // namespace

VolumeCurve log_volume_curve(const ModelManifold& model, const std::vector<double>& radii) {
  model.validate();
  auto g = [&](double t) {
    return t == 0.0 ? -kInf : (model.m - 1) * model.warp.log_value(t) + model.log_weight.value(t);
  };
  VolumeCurve out;
  double L = -kInf, prev = 0.0;
  for (double r : radii) {
    if (!(r > prev)) throw PreconditionError("radii must be positive and increasing");
    double top = -kInf;
    for (int i = 0; i <= 32; ++i) top = std::max(top, g(prev + (r - prev) * i / 32.0));
    L = log_add(L, log_segment(g, prev, r, top, 0));
    out.radii.push_back(r);
    out.log_volume.push_back(L + std::log(model.sphere_constant()));
    prev = r;
  }
  return out;
}

VolumeCurve volume_curve(const VolumeTable& table) {
  VolumeCurve out;
  for (std::size_t i = 0; i < table.radii.size(); ++i) {
    if (!(table.ball_D[i] > 0.0)) continue;
    out.radii.push_back(table.radii[i]);
    out.log_volume.push_back(std::log(table.ball_D[i]));
  }
  return out;
}

std::string to_string(ThresholdOutcome o) {
  return o == ThresholdOutcome::forces_bounded ? "forces_bounded" : "inconclusive";
}

json ThresholdResult::to_json() const {
  return {{"outcome", to_string(outcome)}, {"growth_ok", growth_ok},           {"volume_ok", volume_ok},
          {"d0", opt(d0)},                 {"quotient_slope", opt(quotient_slope)}, {"reason", reason}};
}

ThresholdResult growth_threshold(const WmpParams& w, const GrowthHypotheses& hyp,
                                   const std::optional<VolumeCurve>& curve) {
  w.validate();
  ThresholdResult out;
  const double s = w.sigma_growth, gap = s - w.eta();
  const bool poly = gap <= kBranchTolerance;

  if (s > 0.0) {
    out.growth_ok = hyp.f_liminf_positive && hyp.u_little_o;
    if (!out.growth_ok) out.reason = "growth hypothesis u_+ = o(r^sigma) with liminf f > 0 not granted";
  } else {
    out.growth_ok = hyp.sup_finite;
    if (!out.growth_ok) out.reason = "sigma = 0 needs u* < inf";
  }

  if (!curve) {
    out.volume_ok = std::isfinite(w.d0);
    out.d0 = w.d0;
  } else {
    const auto& rr = curve->radii;
    if (rr.size() < 4) throw PreconditionError("volume curve needs at least 4 radii");
    const double r_last = rr.back();
    std::vector<double> lx, ly;
    double d0 = kInf;
    for (std::size_t i = 0; i < rr.size(); ++i) {
      double r = rr[i];
      if (poly && r <= 1.0) continue;
      double q = curve->log_volume[i] / (poly ? std::log(r) : std::pow(r, gap));
      out.radii.push_back(r);
      out.quotient.push_back(q);
      if (r >= r_last / 10.0) {
        d0 = std::min(d0, q);
        if (q > 0.0) {
          lx.push_back(std::log(r));
          ly.push_back(std::log(q));
        }
      }
    }
    if (lx.size() >= 2) out.quotient_slope = fit_slope(lx, ly);
    // a quotient still growing like a power of r over the last decade has no finite liminf
    out.volume_ok = std::isfinite(d0) && (!out.quotient_slope || *out.quotient_slope < 0.05);
    if (std::isfinite(d0)) out.d0 = d0;
    if (!out.volume_ok && out.reason.empty())
      out.reason = poly ? "log vol / log r does not settle" : "log vol / r^{sigma-eta} does not settle";
  }

  if (out.growth_ok && out.volume_ok) {
    out.outcome = ThresholdOutcome::forces_bounded;
    out.reason = "u* < inf and f(u*) <= 0";
  }
  return out;
}

json SharpnessReport::to_json() const {
  return {{"p", p},         {"m", m},         {"residual_max", residual_max}, {"u_hat", u_hat},
          {"u_hat_above", u_hat_above}, {"constant", constant.to_json()}, {"bound", bound}, {"K", K}};
}

SharpnessReport sharpness_example(double p, int m, const std::vector<double>& r_grid) {
  if (!(p > 1.0)) throw PreconditionError("p must exceed 1");
  if (m < 1) throw PreconditionError("m must be >= 1");
  if (r_grid.empty()) throw PreconditionError("sharpness example needs a radius grid");
  SharpnessReport out;
  out.p = p;
  out.m = m;
  const double pc = p / (p - 1.0);
  double rmax = 0.0;
  for (double r : r_grid) {
    if (!(r > 0.0)) throw PreconditionError("radii must be positive");
    double u1 = std::pow(r, pc - 1.0), u2 = (pc - 1.0) * std::pow(r, pc - 2.0);
    double lap = (p - 1.0) * std::pow(u1, p - 2.0) * u2 + (m - 1.0) / r * std::pow(u1, p - 1.0);
    out.residual_max = std::max(out.residual_max, std::abs(lap - m));
    rmax = std::max(rmax, r);
  }
  const double u = std::pow(rmax, pc) / pc;
  out.u_hat = u / std::pow(rmax, pc);
  out.u_hat_above = u / std::pow(rmax, pc + 0.1);

  WmpParams w;
  w.sigma_growth = pc;
  w.delta = p - 1.0;
  w.chi = 0.0;
  w.mu = 0.0;
  w.d0 = m;
  w.A_bound = 1.0;
  out.constant = wmp_constant(w);
  out.bound = out.constant.value * std::pow(std::max(out.u_hat, 0.0), w.delta - w.chi);
  out.K = m;
  return out;
}

}  // namespace koforge
