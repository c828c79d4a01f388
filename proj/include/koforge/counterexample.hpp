#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "koforge/function_spec.hpp"
#include "koforge/tabulated.hpp"
#include "koforge/transforms.hpp"

namespace koforge {

// Delta_p u >= f(u) ell(|grad u|) on flat R^m, phi(t) = t^{p-1}.
struct CounterexampleProblem {
  double p = 2.0;
  int m = 2;
  FunctionSpec f = FunctionSpec::power(1, 1);
  FunctionSpec ell = FunctionSpec::constant(1);

  void validate() const;
  StructuralProfile profile() const;
  nlohmann::json to_json() const;
};

// w(t) defined by t = int_1^{w} ds / K^{-1}(F(s)), so w(0) = 1 and w' = K^{-1}(F(w)).
class WProfile {
 public:
  explicit WProfile(const CounterexampleProblem& problem);
  WProfile(const WProfile&) = delete;
  WProfile& operator=(const WProfile&) = delete;

  const CounterexampleProblem& problem() const { return prob_; }
  const KoTransforms& transforms() const { return tr_; }
  Verdict not_ko_verdict() const { return verdict_; }

  double w(double t) const;
  double w_prime(double t) const { return slope_at(w(t)); }
  // (p-1) w'^{p-2} w'' = f(w) ell(w')
  double w_second(double t) const;
  // t as a function of the value w (the defining integral)
  double time_of(double value) const;
  double slope_at(double value) const { return tr_.Kinv_sigmaF(value, 1.0); }

 private:
  CounterexampleProblem prob_;
  KoTransforms tr_;
  Verdict verdict_;
  MonotoneMap W_;
};

struct GlueParams {
  double p = 2.0;
  int m = 2;
  double glue_lambda = 2.0;
  double t_bar = 0.0;
  double beta0 = 0.0;
  double Lambda = 0.0;
  double p_conj = 2.0;
  double k_lambda = 0.0;  // K^{-1}(F(lambda)) = w'(t_bar)

  // first and second equations of the glue system, and both sides of the third
  double residual_i() const;
  double residual_ii() const;
  double iii_lhs() const;  // m Lambda^{p-1}
  double iii_rhs = 0.0;    // f(lambda) ell(K^{-1}(F(lambda)))
  double iii_rhs_slope = 0.0;  // same with ell at beta'(t_bar)

  nlohmann::json to_json() const;
};

struct GlueProbe {
  double lambda = 0.0;
  double t_bar = 0.0;
  double beta0 = 0.0;
  double Lambda = 0.0;
  bool bracket_ok = false;  // (lambda-1)/K^{-1}(F(2)) <= t_bar <= (lambda-1)/K^{-1}(F(1))
  bool i_ok = false;        // first summand < lambda, so beta0 > 0
  bool iii_ok = false;
  std::string note;

  bool passed() const { return i_ok && iii_ok; }
  nlohmann::json to_json() const;
};

// Glue parameters at one lambda in (1, 2]; never throws on an infeasible lambda.
GlueProbe probe_glue(const WProfile& w, double lambda, GlueParams* out = nullptr);

struct GlueSearch {
  GlueParams params;
  std::vector<GlueProbe> probes;
};

// lambda = 1 + 2^-k for k = 0..40; returns the first passing lambda.
GlueSearch solve_glue_params(const WProfile& w);
GlueSearch solve_glue_params(const CounterexampleProblem& problem);

struct GluedSolution {
  GlueParams params;
  std::vector<double> r, u, u_prime, plap_u, f_term, residual;
  std::vector<int> piece;  // 0 polynomial cap on [0, t_bar], 1 w on [t_bar, r_max]
  double match_value = 0.0;  // |u1 - u2| at t_bar
  double match_slope = 0.0;  // |u1' - u2'| at t_bar

  std::string to_csv() const;  // r, u, u_prime, plap_u, f_term, residual
  nlohmann::json to_json() const;
};

// Radial p-Laplacian (p-1) u'^{p-2} u'' + (m-1)/r u'^{p-1}.
double radial_plaplacian(double p, int m, double r, double u1, double u2);

GluedSolution assemble_u(const WProfile& w, const GlueParams& params, double r_max, int points = 2048);
// min over the grid of (Delta_p u - f(u) ell(|u'|)) / max(1, |Delta_p u|, |f ell|)
double verify_subsolution(const GluedSolution& glued);

}  // namespace koforge
