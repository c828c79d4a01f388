#include "koforge/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "koforge/error.hpp"
#include "koforge/structural.hpp"

namespace koforge {

using nlohmann::json;

namespace {

constexpr double kMonotoneTolerance = 1e-9;

void require_monotone(const FunctionSpec& fn, const char* what) {
  CIncreasingEstimate e = estimate_c_increasing(fn);
  if (!e.holds || e.constant > 1.0 + kMonotoneTolerance)
    throw PreconditionError(std::string(what) + " must be non-decreasing; " + fn.describe() + " drops by a factor " +
                            std::to_string(e.constant) + " between t=" + std::to_string(e.witness.first) +
                            " and t=" + std::to_string(e.witness.second));
}

Verdict checked_verdict(const CounterexampleProblem& prob) {
  prob.validate();
  ConvergenceVerdict v = classify_ko(prob.profile(), KoVariant::KO);
  if (v.verdict == Verdict::convergent)
    throw PreconditionError("the KO integral converges; w reaches infinity in finite time and cannot be glued");
  return v.verdict;
}

}  // namespace

void CounterexampleProblem::validate() const {
  if (!(p > 1.0)) throw PreconditionError("p must exceed 1");
  if (m < 2) throw PreconditionError("m must be >= 2");
  if (f.value(0.0) != 0.0) throw PreconditionError("f(0) must be 0");
  require_monotone(f, "f");
  require_monotone(ell, "ell");
}

StructuralProfile CounterexampleProblem::profile() const {
  StructuralProfile s;
  s.phi = FunctionSpec::power(1.0, p - 1.0);
  s.ell = ell;
  s.f = f;
  s.b_tilde = FunctionSpec::constant(1.0);
  return s;
}

json CounterexampleProblem::to_json() const {
  return {{"p", p}, {"m", m}, {"f", f.to_json()}, {"ell", ell.to_json()}};
}

WProfile::WProfile(const CounterexampleProblem& problem)
    : prob_(problem),
      tr_(problem.profile(), Kernel::K, false),
      verdict_(checked_verdict(problem)),
      W_([this](double s) { return 1.0 / tr_.Kinv_sigmaF(s, 1.0); }, 1.0) {}

double WProfile::w(double t) const {
  if (t < 0.0) throw PreconditionError("w is defined for t >= 0");
  return t == 0.0 ? 1.0 : W_.inverse(t);
}

double WProfile::w_second(double t) const {
  const double v = w(t), d = slope_at(v);
  return prob_.f.value(v) * prob_.ell.value(d) / ((prob_.p - 1.0) * std::pow(d, prob_.p - 2.0));
}

double WProfile::time_of(double value) const {
  if (value < 1.0) throw PreconditionError("w takes values >= 1");
  return W_.forward(value);
}

double GlueParams::residual_i() const { return k_lambda * t_bar / p_conj + beta0 - glue_lambda; }
double GlueParams::residual_ii() const { return Lambda * std::pow(t_bar, p_conj - 1.0) - k_lambda; }
double GlueParams::iii_lhs() const { return m * std::pow(Lambda, p - 1.0); }

json GlueParams::to_json() const {
  return {{"p", p},
          {"m", m},
          {"glue_lambda", glue_lambda},
          {"t_bar", t_bar},
          {"beta0", beta0},
          {"Lambda", Lambda},
          {"p_conj", p_conj},
          {"k_lambda", k_lambda},
          {"residual_i", residual_i()},
          {"residual_ii", residual_ii()},
          {"iii_lhs", iii_lhs()},
          {"iii_rhs", iii_rhs},
          {"iii_rhs_slope", iii_rhs_slope}};
}

json GlueProbe::to_json() const {
  return {{"lambda", lambda}, {"t_bar", t_bar},   {"beta0", beta0},   {"Lambda", Lambda},
          {"bracket_ok", bracket_ok}, {"i_ok", i_ok}, {"iii_ok", iii_ok}, {"note", note}};
}

GlueProbe probe_glue(const WProfile& w, double lambda, GlueParams* out) {
  if (!(lambda > 1.0 && lambda <= 2.0)) throw PreconditionError("glue lambda must lie in (1, 2]");
  const CounterexampleProblem& prob = w.problem();
  GlueProbe pr;
  pr.lambda = lambda;
  GlueParams g;
  g.p = prob.p;
  g.m = prob.m;
  g.glue_lambda = lambda;
  g.p_conj = prob.p / (prob.p - 1.0);
  g.t_bar = w.time_of(lambda);
  g.k_lambda = w.slope_at(lambda);
  pr.t_bar = g.t_bar;
  const double lo = (lambda - 1.0) / w.slope_at(2.0), hi = (lambda - 1.0) / w.slope_at(1.0);
  pr.bracket_ok = g.t_bar >= lo * (1 - 1e-12) && g.t_bar <= hi * (1 + 1e-12);

  const double first = g.k_lambda * g.t_bar / g.p_conj;
  g.beta0 = lambda - first;
  g.Lambda = g.k_lambda * std::pow(g.t_bar, 1.0 - g.p_conj);
  pr.beta0 = g.beta0;
  pr.Lambda = g.Lambda;
  pr.i_ok = first < lambda;

  const double slope = g.Lambda * std::pow(g.t_bar, g.p_conj - 1.0);  // beta'(t_bar)
  g.iii_rhs = prob.f.value(lambda) * prob.ell.value(g.k_lambda);
  g.iii_rhs_slope = prob.f.value(lambda) * prob.ell.value(slope);
  pr.iii_ok = g.iii_lhs() >= g.iii_rhs;
  if (std::abs(g.iii_rhs - g.iii_rhs_slope) > 1e-9 * std::max(1.0, std::abs(g.iii_rhs)))
    pr.note = "ell(K^{-1}(F(lambda))) and ell(beta'(t_bar)) disagree";
  else if (!pr.i_ok)
    pr.note = "K^{-1}(F(lambda)) t_bar / p' >= lambda, beta0 would be <= 0";
  else if (!pr.iii_ok)
    pr.note = "m Lambda^{p-1} < f(lambda) ell(K^{-1}(F(lambda)))";
  if (out) *out = g;
  return pr;
}

GlueSearch solve_glue_params(const WProfile& w) {
  GlueSearch s;
  for (int k = 0; k <= 40; ++k) {
    GlueParams g;
    GlueProbe pr = probe_glue(w, 1.0 + std::ldexp(1.0, -k), &g);
    s.probes.push_back(pr);
    if (pr.passed() && pr.note.empty()) {
      s.params = g;
      return s;
    }
  }
  std::ostringstream os;
  os << "no glue lambda in 1 + 2^-k, k = 0..40, satisfies the system:";
  for (const auto& p : s.probes) os << " [" << p.lambda << ": " << p.note << "]";
  throw NumericalError(os.str());
}

GlueSearch solve_glue_params(const CounterexampleProblem& problem) { return solve_glue_params(WProfile(problem)); }

double radial_plaplacian(double p, int m, double r, double u1, double u2) {
  return (p - 1.0) * std::pow(u1, p - 2.0) * u2 + (m - 1.0) / r * std::pow(u1, p - 1.0);
}

GluedSolution assemble_u(const WProfile& w, const GlueParams& g, double r_max, int points) {
  if (!(r_max > g.t_bar)) throw PreconditionError("r_max must exceed t_bar");
  if (points < 4) throw PreconditionError("assemble_u needs at least 4 points");
  const CounterexampleProblem& prob = w.problem();
  GluedSolution out;
  out.params = g;
  const int n_in = std::max(2, points / 4), n_out = points - n_in;

  auto push = [&](int piece, double r, double u, double du, double plap) {
    double ft = prob.f.value(u) * prob.ell.value(std::abs(du));
    out.piece.push_back(piece);
    out.r.push_back(r);
    out.u.push_back(u);
    out.u_prime.push_back(du);
    out.plap_u.push_back(plap);
    out.f_term.push_back(ft);
    out.residual.push_back((plap - ft) / std::max({1.0, std::abs(plap), std::abs(ft)}));
  };

  const double pc = g.p_conj;
  for (int i = 0; i < n_in; ++i) {
    double r = g.t_bar * i / (n_in - 1);
    double u = g.Lambda * std::pow(r, pc) / pc + g.beta0;
    double du = g.Lambda * std::pow(r, pc - 1.0);
    double d2 = g.Lambda * (pc - 1.0) * std::pow(r, pc - 2.0);
    double plap = r == 0.0 ? g.iii_lhs() : radial_plaplacian(g.p, g.m, r, du, d2);
    push(0, r, u, du, plap);
  }
  for (int i = 0; i < n_out; ++i) {
    double r = i == 0 ? g.t_bar : g.t_bar + (r_max - g.t_bar) * i / (n_out - 1);
    double u = i == 0 ? g.glue_lambda : w.w(r);
    double du = w.slope_at(u);
    double d2 = prob.f.value(u) * prob.ell.value(du) / ((g.p - 1.0) * std::pow(du, g.p - 2.0));
    push(1, r, u, du, radial_plaplacian(g.p, g.m, r, du, d2));
  }

  out.match_value = std::abs(out.u[n_in] - out.u[n_in - 1]);
  out.match_slope = std::abs(out.u_prime[n_in] - out.u_prime[n_in - 1]);
  if (out.match_value > 1e-8 || out.match_slope > 1e-6) {
    std::ostringstream os;
    os << "C1 match at t_bar failed: |u1-u2| = " << out.match_value << ", |u1'-u2'| = " << out.match_slope;
    throw NumericalError(os.str());
  }
  return out;
}

double verify_subsolution(const GluedSolution& glued) {
  if (glued.residual.empty()) throw PreconditionError("glued solution has no grid");
  return *std::min_element(glued.residual.begin(), glued.residual.end());
}

std::string GluedSolution::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "r,u,u_prime,plap_u,f_term,residual\n";
  for (std::size_t i = 0; i < r.size(); ++i)
    os << r[i] << ',' << u[i] << ',' << u_prime[i] << ',' << plap_u[i] << ',' << f_term[i] << ',' << residual[i]
       << '\n';
  return os.str();
}

json GluedSolution::to_json() const {
  return {{"params", params.to_json()},
          {"match_value", match_value},
          {"match_slope", match_slope},
          {"min_residual", r.empty() ? json(nullptr) : json(verify_subsolution(*this))},
          {"r_max", r.empty() ? json(nullptr) : json(r.back())},
          {"u_max", u.empty() ? json(nullptr) : json(*std::max_element(u.begin(), u.end()))}};
}

}  // namespace koforge
