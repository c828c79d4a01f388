#include "koforge/supersolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "koforge/error.hpp"
#include "koforge/numerics.hpp"

namespace koforge {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBlowupGap = 1e-6;
constexpr double kAlphaCap = 1e150;

json opt(std::optional<double> v) { return v ? json(*v) : json(nullptr); }
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void require_verdict(const StructuralProfile& p, KoVariant variant, KoMode mode) {
  ConvergenceVerdict v = classify_ko(p, variant);
  Verdict want = mode == KoMode::KO ? Verdict::convergent : Verdict::divergent;
  if (v.verdict != want)
    throw PreconditionError(to_string(mode) + " mode needs a " + to_string(want) + " " + to_string(variant) +
                            " verdict, got " + to_string(v.verdict));
}

KoVariant variant_of(Kernel k, bool rho) {
  if (k == Kernel::K) return rho ? KoVariant::rhoKO : KoVariant::KO;
  return rho ? KoVariant::rhoKhatO : KoVariant::Khat_O;
}

double required_constant(const ConditionReport& r, const std::string& name) {
  const ConditionEntry& e = r.at(name);
  if (e.holds == Truth::no || !e.constant)
    throw PreconditionError("condition " + name + " fails; its constant is needed for N_sigma");
  return *e.constant;
}

}  // namespace

std::string to_string(KoMode m) { return m == KoMode::KO ? "KO" : "negKO"; }
KoMode ko_mode_from_string(const std::string& s) {
  if (s == "KO") return KoMode::KO;
  if (s == "negKO") return KoMode::negKO;
  throw PreconditionError("unknown ko_mode '" + s + "'");
}

void BuildRequest::validate() const {
  if (!(epsilon > 0.0) || !(eta > epsilon)) throw PreconditionError("supersolution needs 0 < epsilon < eta");
  if (!(t0 >= 0.0) || !(t1 > t0)) throw PreconditionError("supersolution needs 0 <= t0 < t1");
  if (!(A_geom >= 0.0)) throw PreconditionError("A_geom must be >= 0");
  if (grid_points < 2) throw PreconditionError("grid_points must be >= 2");
  if (ko_mode == KoMode::negKO && !(t_max > t1)) throw PreconditionError("t_max must exceed t1");
  if (!(profile.lambda_b > 0.0)) throw PreconditionError("lambda_b must be positive");
}

KoVariant BuildRequest::variant() const { return variant_of(kernel, rho_mode); }

json BuildRequest::to_json() const {
  return {{"kernel", to_string(kernel)}, {"rho_mode", rho_mode}, {"ko_mode", to_string(ko_mode)},
          {"epsilon", epsilon},         {"eta", eta},           {"t0", t0},
          {"t1", t1},                   {"A_geom", A_geom},     {"grid_points", grid_points},
          {"t_max", t_max}};
}

std::string RadialProfile::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,alpha,alpha_prime,lhs,rhs,margin\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    os << t[i] << ',' << alpha[i] << ',' << alpha_prime[i] << ',' << lhs[i] << ',' << rhs[i] << ',' << margin[i]
       << '\n';
  return os.str();
}

json RadialProfile::metadata() const {
  return {{"sigma", sigma},
          {"T_sigma", opt(T_sigma)},
          {"C_sigma", finite_or_null(C_sigma)},
          {"N_sigma_max", N_sigma_max},
          {"residual_margin", residual_margin},
          {"blow_up", blow_up},
          {"b_scale", b_scale},
          {"T_threshold", T_threshold},
          {"truncated", truncated},
          {"grid_points", t.size()},
          {"t_end", t.empty() ? json(nullptr) : json(t.back())},
          {"alpha_end", alpha.empty() ? json(nullptr) : finite_or_null(alpha.back())}};
}

json NsigmaResult::to_json() const {
  auto at_max = [&](const std::vector<double>& v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  };
  return {{"max", max}, {"at", at}, {"I_max", at_max(I)}, {"II_max", at_max(II)}, {"III_max", at_max(III)}};
}

Threshold find_threshold(const FunctionSpec& b) {
  std::vector<double> pts{0.0};
  for (int k = -384; k <= 384; ++k) pts.push_back(std::pow(10.0, k / 64.0));
  const bool drops = b.value(pts.back()) <= 1.0;
  auto ok = [&](double t) {
    double v = b.value(t);
    // positivity from the log so that underflowing tails still count
    if (!std::isfinite(v) || !(v > 0.0 || std::isfinite(b.log_value(t)))) return false;
    if (drops && v > 1.0) return false;
    return b.derivative(t) <= 1e-12 * v / std::max(t, 1.0);
  };
  std::size_t i = pts.size();
  while (i > 0 && ok(pts[i - 1])) --i;
  if (i == pts.size()) throw PreconditionError("b_tilde is not eventually positive and non-increasing");
  Threshold th;
  th.T = pts[i];
  th.scale = drops ? 1.0 : b.value(th.T);
  return th;
}

double compute_Csigma(const StructuralProfile& p, double sigma, double epsilon, Kernel kernel, bool rho_mode) {
  if (!(sigma > 0.0) || !(epsilon > 0.0)) throw PreconditionError("C_sigma needs sigma > 0 and epsilon > 0");
  require_verdict(p, variant_of(kernel, rho_mode), KoMode::KO);
  KoTransforms tr(p, kernel, rho_mode);
  TailMap tail([&](double s) { return tr.integrand(s, sigma); }, epsilon);
  return tail.total();
}

double solve_Tsigma(const StructuralProfile& p, double sigma, double t0, double epsilon, Kernel kernel,
                    bool rho_mode) {
  double C = compute_Csigma(p, sigma, epsilon, kernel, rho_mode);
  if (!std::isfinite(C)) throw PreconditionError("C_sigma is not finite");
  Threshold th = find_threshold(p.b_tilde);
  if (t0 < th.T) throw PreconditionError("t0 lies below the threshold T=" + std::to_string(th.T));
  const FunctionSpec b = p.b_tilde;
  const double lam = p.lambda_b, sc = th.scale;
  MonotoneMap Bm([b, lam, sc](double t) { return std::pow(b.value(t) / sc, lam); }, t0);
  return Bm.inverse(C);
}

NsigmaConstants nsigma_constants(const BuildRequest& req) {
  ConditionReport th = check_theta(req.profile);
  NsigmaConstants c;
  const double Cf = estimate_c_increasing(req.profile.f).constant;
  const double Cl = estimate_c_increasing(req.profile.ell).constant;
  const double C2 = required_constant(th, "theta_2");
  if (req.kernel == Kernel::K) {
    c.C_I = required_constant(th, "theta_1");
    c.C_II = c.C_III = C2 * Cf * Cl;
  } else {
    const double Cphi = required_constant(check_phi(req.profile), "Phi2");
    c.C_I = C2 / Cphi;
    c.C_II = C2 * Cl * Cf;
    c.C_III = C2 * Cf * Cl / Cphi;
  }
  return c;
}

namespace {

Threshold checked_threshold(const BuildRequest& req) {
  req.validate();
  Threshold th = find_threshold(req.profile.b_tilde);
  if (req.t0 < th.T)
    throw PreconditionError("t0=" + std::to_string(req.t0) + " lies below the threshold T=" + std::to_string(th.T));
  require_verdict(req.profile, req.variant(), req.ko_mode);
  return th;
}

MonotoneMap make_B(const BuildRequest& req, const Threshold& th) {
  const FunctionSpec b = req.profile.b_tilde;
  const double lam = req.profile.lambda_b, sc = th.scale;
  return MonotoneMap([b, lam, sc](double t) { return std::pow(b.value(t) / sc, lam); }, req.t0);
}

}  // namespace

SupersolutionBuilder::SupersolutionBuilder(BuildRequest req)
    : req_(std::move(req)),
      thr_(checked_threshold(req_)),
      tr_(req_.profile, req_.kernel, req_.rho_mode),
      Bmap_(make_B(req_, thr_)),
      consts_(nsigma_constants(req_)) {}

double SupersolutionBuilder::b_scaled(double t) const { return req_.profile.b_tilde.value(t) / thr_.scale; }

double SupersolutionBuilder::B(double t) const { return t <= req_.t0 ? 0.0 : Bmap_.forward(t); }

double SupersolutionBuilder::Nterm_scale(double sigma) const {
  const auto& p = req_.profile;
  double ke = tr_.Kinv_sigmaF(req_.epsilon, sigma);
  return p.phi.value(ke) / (p.ell.value(ke) * p.f.value(req_.epsilon));
}

NsigmaResult SupersolutionBuilder::nsigma_on(double sigma, const std::vector<double>& ts) const {
  const auto& p = req_.profile;
  const double lam = p.lambda_b, th = p.theta, A = req_.A_geom;
  const double e1 = lam * (2.0 - th) - 1.0, e2 = lam * (1.0 - th) - 1.0;
  const double ratio = Nterm_scale(sigma);
  NsigmaResult out;
  out.max = -kInf;
  for (double t : ts) {
    double b = b_scaled(t);
    double tb = A == 0.0 ? 0.0 : A * std::pow(t, p.beta / 2.0) * std::pow(b, e2);
    double I = consts_.C_I * sigma * std::pow(b, e1);
    double II = tb == 0.0 ? 0.0 : consts_.C_II * tb * ratio;
    double III = tb == 0.0 ? 0.0 : consts_.C_III * sigma * tb * B(t);
    out.t.push_back(t);
    out.I.push_back(I);
    out.II.push_back(II);
    out.III.push_back(III);
    double N = I + II + III;
    if (N > out.max) {
      out.max = N;
      out.at = t;
    }
  }
  return out;
}

NsigmaResult SupersolutionBuilder::compute_Nsigma(double sigma, const RadialProfile& profile) const {
  return nsigma_on(sigma, profile.t);
}

NsigmaResult SupersolutionBuilder::compute_Nsigma(double sigma, double t_end) const {
  const int n = 1024;
  const double Bend = B(t_end);
  std::vector<double> ts{req_.t0};
  for (int i = 1; i < n; ++i) ts.push_back(Bmap_.inverse(Bend * i / (n - 1)));
  ts.back() = t_end;
  return nsigma_on(sigma, ts);
}

RadialProfile SupersolutionBuilder::build_alpha(double sigma) const {
  if (!(sigma > 0.0) || sigma > 1.0) throw PreconditionError("sigma must lie in (0, 1]");
  const auto& p = req_.profile;
  const double eps = req_.epsilon, lam = p.lambda_b;
  const int N = req_.grid_points;
  RealFn h = [this, sigma](double s) { return tr_.integrand(s, sigma); };
  RealFn bl = [this, lam](double t) { return std::pow(b_scaled(t), lam); };

  RadialProfile out;
  out.sigma = sigma;
  out.b_scale = thr_.scale;
  out.T_threshold = thr_.T;

  if (req_.ko_mode == KoMode::KO) {
    TailMap tail(h, eps);
    const double C = tail.total();
    const double T = Bmap_.inverse(C);
    const double t_end = T - kBlowupGap;
    if (!(t_end > req_.t0)) throw NumericalError("T_sigma lies within the blow-up gap of t0");
    const double Bend = B(t_end);
    out.C_sigma = C;
    out.T_sigma = T;
    out.blow_up = true;
    for (int i = 0; i < N; ++i) {
      double t = i == 0 ? req_.t0 : i == N - 1 ? t_end : Bmap_.inverse(Bend * i / (N - 1));
      double tau = i == 0 ? C : integrate(bl, t, T, 1e-13);
      out.t.push_back(t);
      out.alpha.push_back(i == 0 ? eps : tail.inverse(tau));
    }
  } else {
    MonotoneMap Phi(h, eps);
    double Bend = B(req_.t_max);
    double t_end = req_.t_max;
    Phi.extend_to(kAlphaCap);
    double Bcap = Phi.forward(std::min(Phi.t_cap(), kAlphaCap));
    if (Bcap < Bend) {
      out.truncated = true;
      Bend = Bcap;
      t_end = Bmap_.inverse(Bend);
    }
    out.C_sigma = kInf;
    out.blow_up = false;
    for (int i = 0; i < N; ++i) {
      double Bi = Bend * i / (N - 1);
      double t = i == 0 ? req_.t0 : i == N - 1 ? t_end : Bmap_.inverse(Bi);
      out.t.push_back(t);
      out.alpha.push_back(i == 0 ? eps : Phi.inverse(Bi));
    }
  }

  const double om = p.omega;
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    double t = out.t[i], a = out.alpha[i];
    double b = b_scaled(t), db = p.b_tilde.derivative(t) / thr_.scale;
    double k = tr_.Kinv_sigmaF(a, sigma);
    double R = tr_.R(a);
    double eR = std::exp(-R);
    double a1 = std::pow(b, lam) * k * eR;
    double rho_a = req_.rho_mode && p.rho ? p.rho->value(a) : 0.0;
    double dk = sigma * p.f.value(a) * std::exp((2.0 - om) * R) / tr_.kernel_derivative(k);
    double a2 = lam * std::pow(b, lam - 1.0) * db * k * eR + std::pow(b, lam) * eR * (dk - k * rho_a) * a1;
    out.alpha_prime.push_back(a1);
    out.alpha_second.push_back(a2);
  }
  residual_check(out);
  out.N_sigma_max = compute_Nsigma(sigma, out).max;
  return out;
}

double SupersolutionBuilder::residual_check(RadialProfile& prof) const {
  const auto& p = req_.profile;
  const double A = req_.A_geom;
  prof.lhs.clear();
  prof.rhs.clear();
  prof.margin.clear();
  double worst = kInf;
  for (std::size_t i = 0; i < prof.t.size(); ++i) {
    double t = prof.t[i], a = prof.alpha[i], a1 = prof.alpha_prime[i], a2 = prof.alpha_second[i];
    double dphi = p.phi.derivative(a1);
    double lhs = dphi * a2;
    if (A != 0.0) lhs += A * std::pow(t, p.beta / 2.0) * p.phi.value(a1);
    if (req_.rho_mode && p.rho) lhs += p.rho->value(a) * dphi * a1 * a1;
    double rhs = b_scaled(t) * p.f.value(a) * p.ell.value(a1);
    double m = (rhs - lhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
    prof.lhs.push_back(lhs);
    prof.rhs.push_back(rhs);
    prof.margin.push_back(m);
    worst = std::min(worst, m);
  }
  prof.residual_margin = worst;
  return worst;
}

json SearchResult::to_json() const {
  json pr = json::array();
  for (const auto& p : probes)
    pr.push_back({{"sigma", p.sigma},
                  {"window_ok", p.window_ok},
                  {"horizon_ok", p.horizon_ok},
                  {"N_max", opt(p.N_max)},
                  {"passed", p.passed},
                  {"note", p.note}});
  return {{"sigma", sigma}, {"probes", pr}, {"profile", profile.metadata()}, {"N_sigma", nsigma.to_json()}};
}

SearchResult search_sigma(const BuildRequest& req) {
  SupersolutionBuilder b(req);
  const double eps = req.epsilon, eta = req.eta;
  const double Bt1 = b.B(req.t1);
  SearchResult out;

  auto probe = [&](double s) {
    SigmaProbe pr;
    pr.sigma = s;
    try {
      double window = integrate([&](double x) { return b.integrand(x, s); }, eps, eta, 1e-12);
      pr.window_ok = Bt1 <= window;
      if (!pr.window_ok) {
        pr.note = "alpha(t1) > eta";
      } else {
        double t_end = req.t_max;
        if (req.ko_mode == KoMode::KO) {
          TailMap tail([&](double x) { return b.integrand(x, s); }, eps);
          double C = tail.total();
          pr.horizon_ok = C > Bt1;
          if (pr.horizon_ok) t_end = b.B_inverse(C);
        } else {
          pr.horizon_ok = true;
        }
        if (!pr.horizon_ok) {
          pr.note = "T_sigma <= t1";
        } else {
          pr.N_max = b.compute_Nsigma(s, t_end).max;
          pr.passed = *pr.N_max <= 1.0;
          if (!pr.passed) pr.note = "N_sigma exceeds 1";
        }
      }
    } catch (const Error& e) {
      pr.note = e.what();
    }
    out.probes.push_back(pr);
    return pr.passed;
  };

  std::optional<double> pass, fail;
  for (int k = 0; k <= 12; ++k) {
    double s = std::pow(10.0, -k);
    if (probe(s)) {
      pass = s;
      break;
    }
    fail = s;
  }
  if (!pass) {
    std::ostringstream os;
    os << "no admissible sigma in [1e-12, 1]:";
    for (const auto& p : out.probes) os << " [" << p.sigma << ": " << p.note << "]";
    throw NumericalError(os.str());
  }
  if (fail) {
    double lo = *pass, hi = *fail;
    while (out.probes.size() < 60 && hi / lo > 1.0 + 1e-3) {
      double mid = std::sqrt(lo * hi);
      if (probe(mid)) lo = mid;
      else hi = mid;
    }
    pass = lo;
  }
  out.sigma = *pass;
  out.profile = b.build_alpha(out.sigma);
  out.nsigma = b.compute_Nsigma(out.sigma, out.profile);
  return out;
}

double residual_check(const BuildRequest& req, RadialProfile& profile) {
  SupersolutionBuilder b(req);
  return b.residual_check(profile);
}

RadialProfile build_alpha(const BuildRequest& req, double sigma) { return SupersolutionBuilder(req).build_alpha(sigma); }

}  // namespace koforge
