#include "koforge/transforms.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "koforge/error.hpp"

namespace koforge {

using nlohmann::json;

namespace {

constexpr double kCriticalTol = 1e-12;

bool near(double a, double b) { return std::abs(a - b) <= kCriticalTol * std::max(1.0, std::abs(b)); }

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::convergent: return "Convergent";
    case Verdict::divergent: return "Divergent";
    case Verdict::inconclusive: return "Inconclusive";
  }
  return "?";
}
std::string to_string(Endpoint e) { return e == Endpoint::zero ? "zero" : "infinity"; }
std::string to_string(VerdictMethod m) {
  return m == VerdictMethod::exact_exponent ? "exact-exponent" : "numeric-tail";
}
std::string to_string(Kernel k) { return k == Kernel::K ? "K" : "Khat"; }
std::string to_string(KoVariant v) {
  switch (v) {
    case KoVariant::KO: return "KO";
    case KoVariant::Khat_O: return "Khat_O";
    case KoVariant::rhoKO: return "rhoKO";
    case KoVariant::rhoKhatO: return "rhoKhatO";
  }
  return "?";
}
KoVariant ko_variant_from_string(const std::string& s) {
  if (s == "KO") return KoVariant::KO;
  if (s == "Khat_O") return KoVariant::Khat_O;
  if (s == "rhoKO") return KoVariant::rhoKO;
  if (s == "rhoKhatO") return KoVariant::rhoKhatO;
  throw PreconditionError("unknown KO variant '" + s + "'");
}

json ConvergenceVerdict::to_json() const {
  json ev = json::array();
  for (const auto& r : evidence) ev.push_back({{"limit", r.limit}, {"value", r.value}});
  return {{"verdict", to_string(verdict)},
          {"endpoint", to_string(endpoint)},
          {"fitted_exponent", fitted_exponent ? json(*fitted_exponent) : json(nullptr)},
          {"evidence", ev},
          {"method", to_string(method)}};
}

ConvergenceVerdict classify_exponent_at_infinity(PowerLaw tail) {
  ConvergenceVerdict v;
  v.endpoint = Endpoint::infinity;
  v.method = VerdictMethod::exact_exponent;
  v.fitted_exponent = tail.exponent;
  bool conv;
  if (near(tail.exponent, -1.0)) conv = tail.log_exponent < -1.0 && !near(tail.log_exponent, -1.0);
  else conv = tail.exponent < -1.0;
  v.verdict = conv ? Verdict::convergent : Verdict::divergent;
  return v;
}

ConvergenceVerdict classify_exponent_at_zero(double a) {
  ConvergenceVerdict v;
  v.endpoint = Endpoint::zero;
  v.method = VerdictMethod::exact_exponent;
  v.fitted_exponent = a;
  v.verdict = (a > -1.0 && !near(a, -1.0)) ? Verdict::convergent : Verdict::divergent;
  return v;
}

ConvergenceVerdict classify_numeric(const RealFn& value, const RealFn& log_value, Endpoint endpoint,
                                    const ClassifyOptions& opts) {
  ConvergenceVerdict v;
  v.endpoint = endpoint;
  v.method = VerdictMethod::numeric_tail;
  const bool at_inf = endpoint == Endpoint::infinity;
  const double base = at_inf ? opts.t_start : opts.zero_start;
  const int K = opts.doublings;
  auto point = [&](double j) { return base * std::exp2(at_inf ? j : -j); };

  for (int j = 0; j <= 4 * K; ++j) {
    double t = point(j / 4.0);
    double val = value(t);
    if (std::isnan(val)) throw NumericalError("integrand is not finite at t=" + std::to_string(t));
    if (val < 0.0) throw NumericalError("integrand changes sign at t=" + std::to_string(t));
  }
  double cum = 0.0;
  for (int k = 1; k <= K; ++k) {
    double a = point(k - 1), b = point(k);
    cum += at_inf ? integrate(value, a, b, 1e-10) : integrate(value, b, a, 1e-10);
    v.evidence.push_back({b, cum});
  }
  // ln|integrand| ~ a ln t + b ln|ln t| + c; b only decides when a sits on the critical value.
  std::vector<double> xs, zs, ys;
  const int first = 4 * std::max(0, K - opts.fit_doublings);
  for (int j = first; j <= 4 * K; ++j) {
    double t = point(j / 4.0);
    if (std::abs(std::log(t)) < 1e-3) continue;
    double ly = log_value(t);
    if (std::isnan(ly)) ly = std::log(value(t));
    if (ly == -std::numeric_limits<double>::infinity()) ly = -746.0;
    xs.push_back(std::log(t));
    zs.push_back(std::log(std::abs(std::log(t))));
    ys.push_back(ly);
  }
  auto [a, b] = fit_two_slopes(xs, zs, ys);
  if (!std::isfinite(a) || !std::isfinite(b)) throw NumericalError("could not fit a decay exponent");
  v.fitted_exponent = a;
  const double sign = at_inf ? 1.0 : -1.0;  // orient so that "below -1" means convergent
  const double lo = -1.0 - opts.band, hi = -1.0 + opts.band;
  auto decide = [&](double e) {
    return e < lo ? Verdict::convergent : e > hi ? Verdict::divergent : Verdict::inconclusive;
  };
  const double ea = sign * (a + 1.0) - 1.0;
  v.verdict = decide(ea);
  if (v.verdict == Verdict::inconclusive && std::abs(a + 1.0) <= opts.log_fit_tol) {
    // refit with a pinned at -1 so the log power is not traded against the exponent
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] += xs[i];
    v.verdict = decide(fit_slope(zs, ys));
  }
  return v;
}

ConvergenceVerdict classify_improper(const FunctionSpec& integrand, Endpoint endpoint, const ClassifyOptions& opts) {
  if (opts.allow_exact) {
    if (endpoint == Endpoint::infinity && integrand.hints().tail)
      return classify_exponent_at_infinity(*integrand.hints().tail);
    if (endpoint == Endpoint::zero && integrand.origin_exponent())
      return classify_exponent_at_zero(*integrand.origin_exponent());
  }
  return classify_numeric([&](double t) { return integrand.value(t); },
                          [&](double t) { return integrand.log_value(t); }, endpoint, opts);
}

FunctionSpec kernel_integrand(const FunctionSpec& phi, const FunctionSpec& ell, Kernel kernel) {
  if (kernel == Kernel::K) return FunctionSpec::power(1.0, 1.0) * phi.derivative_spec() * ell.pow(-1.0);
  return phi * ell.pow(-1.0);
}

MonotoneMap make_primitive(const FunctionSpec& f, double lower, MapOptions opts) {
  if (lower == 0.0 && f.origin_exponent() && *f.origin_exponent() <= -1.0)
    throw PreconditionError("integrand " + f.describe() + " is not integrable at 0");
  try {
    return MonotoneMap([f](double s) { return f.value(s); }, lower, opts);
  } catch (const NumericalError& e) {
    throw PreconditionError("integrand " + f.describe() + " is not integrable at 0: " + e.what());
  }
}

MonotoneMap make_kernel_map(const FunctionSpec& phi, const FunctionSpec& ell, Kernel kernel, MapOptions opts) {
  FunctionSpec g = kernel_integrand(phi, ell, kernel);
  const char* cond = kernel == Kernel::K ? "phi_ell_2" : "phi_ell_3";
  ConvergenceVerdict at0 = classify_improper(g, Endpoint::zero);
  if (at0.verdict == Verdict::divergent)
    throw PreconditionError(std::string("condition ") + cond + " fails: kernel integrand " + g.describe() +
                            " is not integrable at 0");
  return MonotoneMap([g](double s) { return g.value(s); }, 0.0, opts);
}

double compute_F(const FunctionSpec& f, double t) {
  if (t < 0) throw PreconditionError("compute_F needs t >= 0");
  if (t == 0) return 0.0;
  return make_primitive(f)(t);
}

double compute_Fhat(const FunctionSpec& f, const FunctionSpec& rho, double omega, double t) {
  if (t < 0) throw PreconditionError("compute_Fhat needs t >= 0");
  if (t == 0) return 0.0;
  StructuralProfile p;
  p.f = f;
  p.rho = rho;
  p.omega = omega;
  p.phi = FunctionSpec::power(1, 1);
  p.ell = FunctionSpec::constant(1);
  KoTransforms tr(p, Kernel::K, true);
  return tr.F(t);
}

double compute_K(const FunctionSpec& phi, const FunctionSpec& ell, double t, Kernel kernel) {
  if (t < 0) throw PreconditionError("compute_K needs t >= 0");
  MonotoneMap K = make_kernel_map(phi, ell, kernel);
  return t == 0 ? 0.0 : K(t);
}

double invert_monotone(const MonotoneMap& map, double y) { return map.inverse(y); }

namespace {

MapOptions dense_knots() {
  MapOptions o;
  o.knots_per_octave = 8;
  return o;
}

std::optional<MonotoneMap> make_rho_map(const StructuralProfile& p, bool use_rho) {
  if (!use_rho) return std::nullopt;
  if (!p.rho) throw PreconditionError("rho variant requested but the profile has no rho");
  if (p.rho->family() == FunctionSpec::Family::constant && p.rho->parameters()[0] == 0.0) return std::nullopt;
  return make_primitive(*p.rho, 0.0, dense_knots());
}

MonotoneMap make_F_map(const StructuralProfile& p, bool use_rho, const std::optional<MonotoneMap>& R) {
  if (!use_rho || !R || p.omega == 2.0) return make_primitive(p.f, 0.0, dense_knots());
  const double k = 2.0 - p.omega;
  FunctionSpec f = p.f;
  MonotoneMap Rm = *R;
  return MonotoneMap(
      [f, Rm, k](double s) {
        double e = k * Rm.forward_interp(s);
        if (e > 700.0) throw NumericalError("Fhat exponent exceeds 700 at s=" + std::to_string(s));
        return f.value(s) * std::exp(e);
      },
      0.0, dense_knots());
}

}  // namespace

KoTransforms::KoTransforms(const StructuralProfile& profile, Kernel kernel, bool use_rho)
    : profile_(profile),
      kernel_(kernel),
      use_rho_(use_rho),
      Rmap_(make_rho_map(profile, use_rho)),
      K_(make_kernel_map(profile.phi, profile.ell, kernel, dense_knots())),
      F_(make_F_map(profile, use_rho, Rmap_)) {}

double KoTransforms::R(double s) const { return Rmap_ ? Rmap_->forward_interp(s) : 0.0; }

double KoTransforms::log_integrand(double s, double sigma) const {
  return R(s) - std::log(Kinv_sigmaF(s, sigma));
}

double KoTransforms::integrand(double s, double sigma) const { return std::exp(log_integrand(s, sigma)); }

double KoTransforms::kernel_derivative(double x) const {
  if (kernel_ == Kernel::K) return x * profile_.phi.derivative(x) / profile_.ell(x);
  return profile_.phi(x) / profile_.ell(x);
}

namespace {

// t^a log^b t composed rules; nullopt when the result is not a power law.
std::optional<PowerLaw> integral_at_infinity(PowerLaw g) {
  if (g.exponent > -1.0 && !near(g.exponent, -1.0)) return PowerLaw{g.exponent + 1.0, g.log_exponent};
  if (near(g.exponent, -1.0) && g.log_exponent > -1.0) return PowerLaw{0.0, g.log_exponent + 1.0};
  return std::nullopt;
}

std::optional<ConvergenceVerdict> exact_ko(const StructuralProfile& p, Kernel kernel, bool use_rho) {
  if (use_rho && p.rho) {
    const auto& rt = p.rho->hints().tail;
    bool zero_rho = p.rho->family() == FunctionSpec::Family::constant && p.rho->parameters()[0] == 0.0;
    bool integrable = rt && (rt->exponent < -1.0 || (near(rt->exponent, -1.0) && rt->log_exponent < -1.0));
    if (!zero_rho && !integrable && p.omega != 2.0) return std::nullopt;
    if (!zero_rho && !integrable) return std::nullopt;
  }
  FunctionSpec g = kernel_integrand(p.phi, p.ell, kernel);
  if (!g.hints().tail) return std::nullopt;
  auto K = integral_at_infinity(*g.hints().tail);
  if (!K || !(K->exponent > 0.0)) return std::nullopt;
  if (p.f.family() == FunctionSpec::Family::exponential && p.f.parameters()[0] > 0.0 && p.f.parameters()[1] > 0.0) {
    // F grows like e^{kt} and K^{-1} like a power, so the integrand decays exponentially
    ConvergenceVerdict v;
    v.method = VerdictMethod::exact_exponent;
    v.verdict = Verdict::convergent;
    return v;
  }
  if (!p.f.hints().tail) return std::nullopt;
  PowerLaw Kinv{1.0 / K->exponent, -K->log_exponent / K->exponent};
  PowerLaw ft = *p.f.hints().tail;
  if (ft.exponent < -1.0 || (near(ft.exponent, -1.0) && ft.log_exponent < -1.0)) {
    // F is bounded, so the integrand tends to a positive constant.
    return classify_exponent_at_infinity(PowerLaw{0.0, 0.0});
  }
  auto F = integral_at_infinity(ft);
  if (!F || !(F->exponent > 0.0)) return std::nullopt;
  PowerLaw comp{Kinv.exponent * F->exponent, Kinv.exponent * F->log_exponent + Kinv.log_exponent};
  return classify_exponent_at_infinity(PowerLaw{-comp.exponent, -comp.log_exponent});
}

}  // namespace

ConvergenceVerdict classify_ko(const StructuralProfile& profile, KoVariant variant, double sigma_scale,
                               const ClassifyOptions& opts) {
  if (!(sigma_scale > 0)) throw PreconditionError("sigma_scale must be positive");
  const Kernel kernel = (variant == KoVariant::KO || variant == KoVariant::rhoKO) ? Kernel::K : Kernel::Khat;
  const bool use_rho = variant == KoVariant::rhoKO || variant == KoVariant::rhoKhatO;
  const char* cond = kernel == Kernel::K ? "phi_ell_2" : "phi_ell_3";
  if (use_rho && !profile.rho) throw PreconditionError("variant " + to_string(variant) + " needs rho in the profile");

  FunctionSpec g = kernel_integrand(profile.phi, profile.ell, kernel);
  ConvergenceVerdict at0 = classify_improper(g, Endpoint::zero, opts);
  ConvergenceVerdict atinf = classify_improper(g, Endpoint::infinity, opts);
  if (at0.verdict == Verdict::divergent || atinf.verdict == Verdict::convergent)
    throw PreconditionError(std::string("condition ") + cond + " fails for kernel " + to_string(kernel));

  if (opts.allow_exact) {
    if (auto v = exact_ko(profile, kernel, use_rho)) return *v;
  }
  try {
    KoTransforms tr(profile, kernel, use_rho);
    return classify_numeric([&](double s) { return tr.integrand(s, sigma_scale); },
                            [&](double s) { return tr.log_integrand(s, sigma_scale); }, Endpoint::infinity, opts);
  } catch (const NumericalError&) {
    // F or K overflows before the evidence window ends
    ConvergenceVerdict v;
    v.verdict = Verdict::inconclusive;
    return v;
  }
}

}  // namespace koforge
