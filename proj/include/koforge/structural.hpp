#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "koforge/function_spec.hpp"
#include "koforge/numerics.hpp"

namespace koforge {

enum class Truth { yes, no, inconclusive };
enum class Method { exact, sampled };

std::string to_string(Truth t);
std::string to_string(Method m);

struct ConditionEntry {
  std::string name;
  Truth holds = Truth::inconclusive;
  std::optional<double> constant;
  std::vector<double> witness;  // a violating sample point, or a pair (s, t)
  Method method = Method::sampled;
  std::string note;
};

struct ConditionReport {
  std::vector<ConditionEntry> entries;

  const ConditionEntry& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  bool any_no() const;
  void merge(const ConditionReport& other);
  nlohmann::json to_json() const;
};

struct StructuralProfile {
  FunctionSpec phi = FunctionSpec::power(1, 1);
  FunctionSpec ell = FunctionSpec::constant(1);
  FunctionSpec f = FunctionSpec::power(1, 1);
  FunctionSpec b_tilde = FunctionSpec::constant(1);
  std::optional<FunctionSpec> rho, g_fn, h_fn;
  double theta = 0.0;
  double lambda_b = 1.0;
  double beta = -2.0;
  double mu = 0.0;
  double A_bound = 1.0;
  double delta = 1.0;
  double chi = 0.0;
  double omega = 0.0;
  double c_increasing_tolerance = 1e-9;
  std::vector<std::string> warnings;

  // Clamps beta below -2 (with a warning) and checks lambda_b > 0.
  void normalize();
  nlohmann::json to_json() const;
};

struct CIncreasingEstimate {
  bool holds = false;
  double constant = 1.0;
  std::pair<double, double> witness{0.0, 0.0};
};

inline constexpr double kCIncreasingCap = 1e6;

CIncreasingEstimate estimate_c_increasing(const FunctionSpec& fn, const LogGrid& grid = {},
                                          double cap = kCIncreasingCap);

ConditionReport check_phi(const StructuralProfile& profile, const LogGrid& grid = {});
ConditionReport check_grad_ell(const StructuralProfile& profile, const LogGrid& grid = {});
ConditionReport check_theta(const StructuralProfile& profile, const LogGrid& grid = {});
ConditionReport check_phi_ell(const StructuralProfile& profile, const LogGrid& grid = {});
ConditionReport check_b_tilde(const StructuralProfile& profile, const LogGrid& grid = {});

enum class RegimeKind {
  theta_beta_mu,
  theta_beta_mu_prime,   // three cases
  blowup_balance,        // lambda(2-theta) >= 1 plus growth bound (i) or (ii)
  p_laplacian_power,     // p > q+1, 0 <= mu <= p-q, beta <= 2(p-q-mu-1)
  mean_curvature_power,  // 0 <= q < -beta/2 - mu
  rho_blowup_balance,    // growth bound for the rho-twisted construction
};

std::string to_string(RegimeKind k);
RegimeKind regime_kind_from_string(const std::string& s);

ConditionReport check_parameter_regimes(const StructuralProfile& profile, RegimeKind kind,
                                        const LogGrid& grid = {});

// Every check above, including all regime kinds that apply to the profile.
ConditionReport check_all(const StructuralProfile& profile, const LogGrid& grid = {});

// C-increasing decision for g: exponent rule when both asymptotic hints are
// present, sampled estimate otherwise.
ConditionEntry c_increasing_entry(const std::string& name, const FunctionSpec& g, const LogGrid& grid);

// True when fn (or any composite term) is a sampled table.
bool involves_table(const FunctionSpec& fn);

}  // namespace koforge
