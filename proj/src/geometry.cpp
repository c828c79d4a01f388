#include "koforge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "koforge/error.hpp"
#include "koforge/numerics.hpp"

namespace koforge {

using nlohmann::json;

namespace {

constexpr double kMaxStep = 1e-3;

struct State {
  double h, dh;
};

State rk4(const FunctionSpec& G, double r, State y, double dr) {
  auto f = [&](double x, State s) { return State{s.dh, G.value(x) * s.h}; };
  State k1 = f(r, y);
  State k2 = f(r + dr / 2, {y.h + dr / 2 * k1.h, y.dh + dr / 2 * k1.dh});
  State k3 = f(r + dr / 2, {y.h + dr / 2 * k2.h, y.dh + dr / 2 * k2.dh});
  State k4 = f(r + dr, {y.h + dr * k3.h, y.dh + dr * k3.dh});
  return {y.h + dr / 6 * (k1.h + 2 * k2.h + 2 * k3.h + k4.h), y.dh + dr / 6 * (k1.dh + 2 * k2.dh + 2 * k3.dh + k4.dh)};
}

State advance(const FunctionSpec& G, double r, State y, double to) {
  if (to <= r) return y;
  int n = std::max(1, static_cast<int>(std::ceil((to - r) / kMaxStep)));
  double dr = (to - r) / n;
  for (int i = 0; i < n; ++i) {
    y = rk4(G, r, y, dr);
    r = (i + 1 == n) ? to : r + dr;
  }
  if (!std::isfinite(y.h) || !std::isfinite(y.dh))
    throw NumericalError("comparison ODE step failed near r=" + std::to_string(to));
  return y;
}

double d1(const RealFn& v, double r, double s) {
  return (v(r - 2 * s) - 8 * v(r - s) + 8 * v(r + s) - v(r + 2 * s)) / (12 * s);
}
double d2(const RealFn& v, double r, double s) {
  return (-v(r - 2 * s) + 16 * v(r - s) - 30 * v(r) + 16 * v(r + s) - v(r + 2 * s)) / (12 * s * s);
}

}  // namespace

void ModelManifold::validate() const {
  if (m < 2) throw PreconditionError("model dimension m must be >= 2");
  if (!(n > m)) throw PreconditionError("synthetic dimension n must exceed m");
  if (std::abs(warp.value(0.0)) > 1e-12 || std::abs(warp.derivative(0.0) - 1.0) > 1e-6)
    throw PreconditionError("warping function needs s(0)=0 and s'(0)=1");
}

double ModelManifold::sphere_constant() const {
  return 2.0 * std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0);
}

double ModelManifold::area(double r) const {
  return sphere_constant() * std::pow(warp.value(r), m - 1) * std::exp(log_weight.value(r));
}

json ModelManifold::to_json() const {
  return {{"m", m}, {"n", n}, {"warp", warp.to_json()}, {"log_weight", log_weight.to_json()}};
}

std::pair<double, double> ComparisonSolution::eval(double x) const {
  if (x < 0.0 || x > r.back() * (1 + 1e-14))
    throw PreconditionError("comparison solution evaluated outside [0, " + std::to_string(r.back()) + "]");
  std::size_t i = std::min(static_cast<std::size_t>(x / step_), r.size() - 1);
  if (r[i] > x && i > 0) --i;
  State y = advance(G_, r[i], {h[i], h_prime[i]}, x);
  return {y.h, y.dh};
}

ComparisonSolution solve_h(const FunctionSpec& G, double r_max, int points) {
  if (!(r_max > 0.0) || points < 2) throw PreconditionError("solve_h needs r_max > 0 and at least 2 points");
  ComparisonSolution sol;
  sol.G_ = G;
  sol.step_ = r_max / (points - 1);
  State y{0.0, 1.0};
  sol.r.push_back(0.0);
  sol.h.push_back(0.0);
  sol.h_prime.push_back(1.0);
  for (int i = 1; i < points; ++i) {
    double a = sol.r.back(), b = (i + 1 == points) ? r_max : i * sol.step_;
    State prev = y;
    y = advance(G, a, y, b);
    if (!sol.first_zero && prev.h > 0.0 && y.h <= 0.0) {
      sol.first_zero = bracket_root([&](double x) { return advance(G, a, prev, x).h; }, a, b, 1e-15);
    }
    sol.r.push_back(b);
    sol.h.push_back(y.h);
    sol.h_prime.push_back(y.dh);
  }
  return sol;
}

double lr_comparison_bound(const ComparisonSolution& sol, double n, double r) {
  if (!(r > 0.0)) throw PreconditionError("comparison bound needs r > 0");
  if (sol.first_zero && r >= *sol.first_zero)
    throw PreconditionError("r=" + std::to_string(r) + " lies beyond the first zero of h");
  auto [h, dh] = sol.eval(r);
  return (n - 1.0) * dh / h;
}

double model_Lr(const ModelManifold& model, double r) {
  if (!(r > 0.0)) throw PreconditionError("model_Lr needs r > 0");
  return (model.m - 1) * model.warp.derivative(r) / model.warp.value(r) + model.log_weight.derivative(r);
}

double ricci_weighted_radial(const ModelManifold& model, double r) {
  return -(model.m - 1) * model.warp.derivative(r, 2) / model.warp.value(r) - model.log_weight.derivative(r, 2);
}

double ricci_nm_radial(const ModelManifold& model, double r) {
  double dh = model.log_weight.derivative(r);
  return ricci_weighted_radial(model, r) - dh * dh / (model.n - model.m);
}

RiccatiCheck check_riccati_inequality(const ModelManifold& model, double r_lo, double r_hi, int points,
                                      bool drop_weight_term) {
  if (r_lo < 1e-3) throw PreconditionError("Riccati check needs r >= 1e-3");
  if (!(r_hi > r_lo) || points < 2) throw PreconditionError("Riccati check needs r_lo < r_hi and 2 points");
  RiccatiCheck out;
  out.max_residual = -std::numeric_limits<double>::infinity();
  const int m = model.m;
  for (int i = 0; i < points; ++i) {
    double r = r_lo + (r_hi - r_lo) * i / (points - 1);
    double s = model.warp.value(r), s1 = model.warp.derivative(r), s2 = model.warp.derivative(r, 2);
    double w2 = model.log_weight.derivative(r, 2);
    double Lr = model_Lr(model, r);
    double dLr = (m - 1) * (s2 / s - (s1 / s) * (s1 / s)) + w2;
    double ric = drop_weight_term ? ricci_weighted_radial(model, r) : ricci_nm_radial(model, r);
    double res = Lr * Lr / (model.n - 1.0) + dLr + ric;
    if (res > out.max_residual) {
      out.max_residual = res;
      out.at = r;
    }
  }
  return out;
}

BochnerCheck verify_bochner_radial(const ModelManifold& model, const FunctionSpec& u, double r_lo, double r_hi,
                                   int points) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw PreconditionError("Bochner check needs 0 < r_lo < r_hi");
  BochnerCheck out;
  RealFn v = [&](double r) {
    double du = u.derivative(r);
    return du * du;
  };
  for (int i = 0; i < points; ++i) {
    double r = r_lo + (r_hi - r_lo) * i / (points - 1);
    double step = 1e-3 * r;
    double lhs = 0.5 * (d2(v, r, step) + model_Lr(model, r) * d1(v, r, step));
    double du = u.derivative(r), ddu = u.derivative(r, 2);
    double sr = model.warp.derivative(r) / model.warp.value(r);
    double hess2 = ddu * ddu + (model.m - 1) * (du * sr) * (du * sr);
    double dLu = u.derivative(r, 3) + model_Lr(model, r) * ddu +
                 ((model.m - 1) * (model.warp.derivative(r, 2) / model.warp.value(r) - sr * sr) +
                  model.log_weight.derivative(r, 2)) *
                     du;
    double rhs = hess2 + dLu * du + ricci_weighted_radial(model, r) * du * du;
    double mis = std::abs(lhs - rhs);
    if (mis > out.max_mismatch) {
      out.max_mismatch = mis;
      out.at = r;
    }
  }
  return out;
}

std::string VolumeTable::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "r,area_D,ball_D,A_Gn,V_Gn,ratio_area,ratio_ball\n";
  for (std::size_t i = 0; i < radii.size(); ++i)
    os << radii[i] << ',' << area_D[i] << ',' << ball_D[i] << ',' << A_Gn[i] << ',' << V_Gn[i] << ','
       << ratio_area[i] << ',' << ratio_ball[i] << '\n';
  return os.str();
}

VolumeTable volume_table(const ModelManifold& model, const ComparisonSolution& sol, const std::vector<double>& radii) {
  model.validate();
  VolumeTable t;
  double prev = 0.0, ball = 0.0, vol = 0.0;
  const double e = model.n - 1.0;
  RealFn hpow = [&](double x) { return std::pow(sol.eval(x).first, e); };
  RealFn area = [&](double x) { return model.area(x); };
  for (double r : radii) {
    if (!(r > prev) && !(prev == 0.0 && r > 0.0)) throw PreconditionError("volume table radii must increase from 0");
    if (sol.first_zero && r >= *sol.first_zero) throw PreconditionError("radius beyond the first zero of h");
    ball += integrate(area, prev, r, 1e-13);
    vol += integrate(hpow, prev, r, 1e-13);
    prev = r;
    double a = model.area(r), A = std::pow(sol.eval(r).first, e);
    t.radii.push_back(r);
    t.area_D.push_back(a);
    t.ball_D.push_back(ball);
    t.A_Gn.push_back(A);
    t.V_Gn.push_back(vol);
    t.ratio_area.push_back(a / A);
    t.ratio_ball.push_back(ball / vol);
  }
  return t;
}

MonotonicityCheck check_ratio_monotonicity(const VolumeTable& table, double rel_tol) {
  MonotonicityCheck out;
  for (std::size_t i = 1; i < table.radii.size(); ++i) {
    for (auto [col, name] : {std::pair{&table.ratio_area, "ratio_area"}, std::pair{&table.ratio_ball, "ratio_ball"}}) {
      if ((*col)[i] > (*col)[i - 1] * (1.0 + rel_tol)) {
        out.monotone = false;
        out.first_violation = table.radii[i];
        out.column = name;
        return out;
      }
    }
  }
  return out;
}

double petersen_constant(double n, double p) {
  if (!(p > n / 2.0)) throw PreconditionError("petersen_constant needs p > n/2");
  // Same value as (1/(n-1) - 1/(2p-1))^{-p}, without the cancellation.
  return std::pow((n - 1.0) * (2.0 * p - 1.0) / (2.0 * p - n), p);
}

json PetersenResult::to_json() const {
  return {{"bound", bound},         {"actual_ratio", actual_ratio},   {"C_r0", C_r0},
          {"f_integral", f_integral}, {"psi_excess", psi_excess},     {"ricci_deficit", ricci_deficit},
          {"psi_integral", psi_integral}, {"deficit_bound", deficit_bound}};
}

PetersenResult petersen_volume_bound(const ModelManifold& model, const FunctionSpec& G, double n, double p,
                                     double r0, double R) {
  model.validate();
  const double Cnp = petersen_constant(n, p);
  if (!(r0 > 0.0) || !(R > r0)) throw PreconditionError("petersen bound needs 0 < r0 < R");
  ComparisonSolution sol = solve_h(G, R, std::max(2001, static_cast<int>(R / kMaxStep) / 4 + 1));
  if (sol.first_zero) throw PreconditionError("h vanishes before R; G must be nonnegative");

  RealFn rho = [&](double r) { return std::max(0.0, -(ricci_nm_radial(model, r) + (n - 1.0) * G.value(r))); };
  RealFn psi = [&](double r) {
    auto [h, dh] = sol.eval(r);
    return std::max(0.0, model_Lr(model, r) - (n - 1.0) * dh / h);
  };
  RealFn area = [&](double r) { return model.area(r); };
  RealFn hpow = [&](double r) { return std::pow(sol.eval(r).first, n - 1.0); };
  RealFn rho_p = [&](double r) { return std::pow(rho(r), p) * model.area(r); };
  RealFn psi_p = [&](double r) { return std::pow(psi(r), 2.0 * p) * model.area(r); };

  // Grid with r0 as a node; cumulative integrals per cell.
  const int n0 = 200, n1 = 2000;
  std::vector<double> t;
  for (int i = 0; i <= n0; ++i) t.push_back(r0 * i / n0);
  for (int i = 1; i <= n1; ++i) t.push_back(r0 + (R - r0) * i / n1);
  std::vector<double> ball(t.size(), 0.0), vol(t.size(), 0.0), rp(t.size(), 0.0), pp(t.size(), 0.0);
  PetersenResult out;
  for (std::size_t i = 1; i < t.size(); ++i) {
    ball[i] = ball[i - 1] + integrate(area, t[i - 1], t[i], 1e-12);
    vol[i] = vol[i - 1] + integrate(hpow, t[i - 1], t[i], 1e-12);
    rp[i] = rp[i - 1] + integrate(rho_p, t[i - 1], t[i], 1e-12);
    pp[i] = pp[i - 1] + integrate(psi_p, t[i - 1], t[i], 1e-12);
    out.psi_excess = std::max(out.psi_excess, psi(t[i]));
  }
  auto f = [&](std::size_t i) {
    double A = std::pow(sol.eval(t[i]).first, n - 1.0);
    return std::pow(Cnp, 1.0 / (2 * p)) * t[i] * A / std::pow(vol[i], 1.0 + 1.0 / (2 * p)) *
           std::pow(rp[i], 1.0 / (2 * p));
  };
  // Simpson over [r0, R] (n1 is even).
  double fi = 0.0;
  const double hcell = (R - r0) / n1;
  for (int k = 0; k <= n1; ++k) {
    double w = (k == 0 || k == n1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    fi += w * f(n0 + k);
  }
  fi *= hcell / 3.0;
  out.f_integral = fi;
  out.C_r0 = std::pow(ball[n0] / vol[n0], 1.0 / (2 * p));
  out.bound = std::pow(out.C_r0 + fi / (2 * p), 2 * p);
  out.actual_ratio = ball.back() / vol.back();
  out.ricci_deficit = rp.back();
  out.psi_integral = pp.back();
  out.deficit_bound = Cnp * rp.back();
  return out;
}

}  // namespace koforge
