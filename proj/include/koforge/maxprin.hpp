#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "koforge/geometry.hpp"

namespace koforge {

struct WmpParams {
  double sigma_growth = 1.0;
  double delta = 1.0;
  double chi = 0.0;
  double mu = 0.0;
  double d0 = 1.0;
  double A_bound = 1.0;

  // mu + (sigma - 1)(1 + delta - chi)
  double eta() const;
  void validate() const;
  nlohmann::json to_json() const;
};

enum class WmpBranch {
  sigma_zero,
  exponential_eta_negative,     // sigma - eta > 0, eta < 0
  exponential_eta_nonnegative,  // sigma - eta > 0, eta >= 0
  polynomial_nonpositive,       // sigma - eta = 0, delta(sigma-1) + d0 - 1 <= 0
  polynomial_positive           // sigma - eta = 0, delta(sigma-1) + d0 - 1 > 0
};
std::string to_string(WmpBranch b);

struct WmpConstant {
  double value = 0.0;
  WmpBranch branch = WmpBranch::sigma_zero;

  nlohmann::json to_json() const;
};

// |sigma - eta| below this counts as the polynomial case
inline constexpr double kBranchTolerance = 1e-12;

WmpConstant wmp_constant(const WmpParams& params);

// log vol_D(B_r) sampled at increasing radii
struct VolumeCurve {
  std::vector<double> radii, log_volume;
};

VolumeCurve log_volume_curve(const ModelManifold& model, const std::vector<double>& radii);
VolumeCurve volume_curve(const VolumeTable& table);

enum class ThresholdOutcome { forces_bounded, inconclusive };
std::string to_string(ThresholdOutcome o);

struct GrowthHypotheses {
  bool f_liminf_positive = true;
  bool u_little_o = true;      // u_+ = o(r^sigma) when sigma > 0
  bool sup_finite = false;     // u* < inf, used when sigma = 0
};

struct ThresholdResult {
  ThresholdOutcome outcome = ThresholdOutcome::inconclusive;
  bool growth_ok = false;
  bool volume_ok = false;
  std::optional<double> d0;
  std::optional<double> quotient_slope;  // log-log slope of the quotient over the last decade
  std::vector<double> radii, quotient;
  std::string reason;

  nlohmann::json to_json() const;
};

// Without a curve the volume condition is taken from params.d0 being finite.
ThresholdResult growth_threshold(const WmpParams& params, const GrowthHypotheses& hyp,
                                   const std::optional<VolumeCurve>& curve = std::nullopt);

struct SharpnessReport {
  double p = 2.0;
  int m = 2;
  double residual_max = 0.0;  // max |Delta_p u - m| over the grid
  double u_hat = 0.0;         // u / r^{p'} at the largest radius
  double u_hat_above = 0.0;   // u / r^{p' + 0.1} at the largest radius
  WmpConstant constant;       // at sigma = p', delta = p - 1, chi = mu = 0, d0 = m
  double bound = 0.0;         // C u_hat^{delta}
  double K = 0.0;             // Delta_p u = m

  nlohmann::json to_json() const;
};

SharpnessReport sharpness_example(double p, int m, const std::vector<double>& r_grid);

}  // namespace koforge
