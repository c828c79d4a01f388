#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "koforge/structural.hpp"
#include "koforge/transforms.hpp"

namespace koforge {

enum class KoMode { KO, negKO };
std::string to_string(KoMode m);
KoMode ko_mode_from_string(const std::string& s);

struct BuildRequest {
  StructuralProfile profile;  // profile.beta is the exponent in A t^{beta/2}
  Kernel kernel = Kernel::K;
  bool rho_mode = false;
  KoMode ko_mode = KoMode::KO;
  double epsilon = 1.0;
  double eta = 2.0;
  double t0 = 1.0;
  double t1 = 2.0;
  double A_geom = 1.0;
  int grid_points = 4096;
  double t_max = 1e6;  // horizon of negKO profiles

  void validate() const;
  KoVariant variant() const;
  nlohmann::json to_json() const;
};

struct RadialProfile {
  std::vector<double> t, alpha, alpha_prime, alpha_second, lhs, rhs, margin;
  double sigma = 1.0;
  std::optional<double> T_sigma;  // empty in negKO mode (infinite)
  double C_sigma = 0.0;           // infinite in negKO mode
  double N_sigma_max = 0.0;
  double residual_margin = 0.0;
  bool blow_up = false;
  double b_scale = 1.0;  // b_tilde is divided by this so that it is <= 1 on [T, inf)
  double T_threshold = 0.0;
  bool truncated = false;  // negKO grid stopped early because alpha exceeded 1e150

  std::string to_csv() const;  // t, alpha, alpha_prime, lhs, rhs, margin
  nlohmann::json metadata() const;
};

// Smallest scan point T from which b_tilde' <= 0 (and b_tilde <= 1 when b_tilde
// eventually drops below 1), together with the scale factor for b_tilde.
struct Threshold {
  double T = 0.0;
  double scale = 1.0;
};
Threshold find_threshold(const FunctionSpec& b_tilde);

double compute_Csigma(const StructuralProfile& profile, double sigma, double epsilon, Kernel kernel = Kernel::K,
                      bool rho_mode = false);
// T with int_{t0}^T (b_tilde/scale)^lambda = C_sigma.
double solve_Tsigma(const StructuralProfile& profile, double sigma, double t0, double epsilon,
                    Kernel kernel = Kernel::K, bool rho_mode = false);

struct NsigmaConstants {
  double C_I = 1.0, C_II = 1.0, C_III = 1.0;
};
NsigmaConstants nsigma_constants(const BuildRequest& req);

struct NsigmaResult {
  double max = 0.0;
  double at = 0.0;
  std::vector<double> t, I, II, III;

  nlohmann::json to_json() const;  // summary only
};

class SupersolutionBuilder {
 public:
  explicit SupersolutionBuilder(BuildRequest req);

  const BuildRequest& request() const { return req_; }
  const Threshold& threshold() const { return thr_; }
  const KoTransforms& transforms() const { return tr_; }
  const NsigmaConstants& constants() const { return consts_; }

  // e^{R(s)} / K^{-1}(sigma Fhat(s))
  double integrand(double s, double sigma) const { return tr_.integrand(s, sigma); }
  double b_scaled(double t) const;
  double B(double t) const;  // int_{t0}^t b_scaled^lambda
  double B_inverse(double y) const { return Bmap_.inverse(y); }

  RadialProfile build_alpha(double sigma) const;
  NsigmaResult compute_Nsigma(double sigma, const RadialProfile& profile) const;
  // N_sigma on [t0, t_end) without building alpha; t_end is T_sigma or t_max.
  NsigmaResult compute_Nsigma(double sigma, double t_end) const;
  double residual_check(RadialProfile& profile) const;

 private:
  double Nterm_scale(double sigma) const;  // phi(k_e) / (ell(k_e) f(eps))
  NsigmaResult nsigma_on(double sigma, const std::vector<double>& ts) const;

  BuildRequest req_;
  Threshold thr_;
  KoTransforms tr_;
  MonotoneMap Bmap_;
  NsigmaConstants consts_;
};

struct SigmaProbe {
  double sigma = 0.0;
  bool window_ok = false;   // alpha(t1) <= eta
  bool horizon_ok = false;  // T_sigma > t1
  std::optional<double> N_max;
  bool passed = false;
  std::string note;
};

struct SearchResult {
  double sigma = 0.0;
  RadialProfile profile;
  NsigmaResult nsigma;
  std::vector<SigmaProbe> probes;

  nlohmann::json to_json() const;
};

// Probes sigma = 1, 10^-1, ..., 10^-12, then bisects in log sigma above the
// first passing probe; builds the profile for the largest passing sigma.
SearchResult search_sigma(const BuildRequest& req);

double residual_check(const BuildRequest& req, RadialProfile& profile);
RadialProfile build_alpha(const BuildRequest& req, double sigma);

}  // namespace koforge
