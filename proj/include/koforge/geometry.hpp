#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "koforge/function_spec.hpp"

namespace koforge {

// Radial warped product [0, inf) x_s S^{m-1} with weight D = e^{h_w(r)} and
// synthetic dimension n > m.
struct ModelManifold {
  int m = 2;
  double n = 3.0;
  FunctionSpec warp = FunctionSpec::power(1.0, 1.0);
  FunctionSpec log_weight = FunctionSpec::constant(0.0);

  void validate() const;
  double sphere_constant() const;  // area of the unit (m-1)-sphere
  // vol_D of the geodesic sphere of radius r
  double area(double r) const;
  nlohmann::json to_json() const;
};

class ComparisonSolution {
 public:
  std::vector<double> r, h, h_prime;
  std::optional<double> first_zero;

  // (h, h') at any r in [0, r.back()], integrated from the nearest node.
  std::pair<double, double> eval(double x) const;
  double r_max() const { return r.back(); }

 private:
  friend ComparisonSolution solve_h(const FunctionSpec& G, double r_max, int points);
  FunctionSpec G_;
  double step_ = 0.0;
};

// h'' = G h, h(0) = 0, h'(0) = 1, RK4 on a uniform grid.
ComparisonSolution solve_h(const FunctionSpec& G, double r_max, int points = 4001);

// (n-1) h'(r) / h(r)
double lr_comparison_bound(const ComparisonSolution& sol, double n, double r);

// (m-1) s'/s + h_w'
double model_Lr(const ModelManifold& model, double r);
// Radial component of the modified Bakry-Emery Ricci tensor:
// -(m-1) s''/s - h_w'' - h_w'^2/(n-m)
double ricci_nm_radial(const ModelManifold& model, double r);
// Same without the synthetic-dimension term: -(m-1) s''/s - h_w''
double ricci_weighted_radial(const ModelManifold& model, double r);

struct RiccatiCheck {
  double max_residual = 0.0;
  double at = 0.0;
};

// max over the grid of (Lr)^2/(n-1) + (Lr)' + Ric_{n,m}. With drop_weight_term the
// h_w'^2/(n-m) part of the curvature is left out, which can make the residual positive.
RiccatiCheck check_riccati_inequality(const ModelManifold& model, double r_lo, double r_hi, int points = 512,
                                      bool drop_weight_term = false);

struct BochnerCheck {
  double max_mismatch = 0.0;
  double at = 0.0;
};

// Radial check of 1/2 L|grad u|^2 = |Hess u|^2 + <grad Lu, grad u> + Ric_L(grad u, grad u).
BochnerCheck verify_bochner_radial(const ModelManifold& model, const FunctionSpec& u, double r_lo, double r_hi,
                                   int points = 256);

struct VolumeTable {
  std::vector<double> radii, area_D, ball_D, A_Gn, V_Gn, ratio_area, ratio_ball;

  std::string to_csv() const;
};

VolumeTable volume_table(const ModelManifold& model, const ComparisonSolution& sol, const std::vector<double>& radii);

struct MonotonicityCheck {
  bool monotone = true;
  std::optional<double> first_violation;
  std::string column;  // "ratio_area" or "ratio_ball"
};

MonotonicityCheck check_ratio_monotonicity(const VolumeTable& table, double rel_tol = 1e-9);

// (1/(n-1) - 1/(2p-1))^{-p}
double petersen_constant(double n, double p);

struct PetersenResult {
  double bound = 0.0;         // (C_r0 + int_{r0}^R f / 2p)^{2p}
  double actual_ratio = 0.0;  // vol_D B_R / V_{G,n}(R)
  double C_r0 = 0.0;
  double f_integral = 0.0;
  double psi_excess = 0.0;     // max of psi on [0, R]
  double ricci_deficit = 0.0;  // int_{B_R} rho^p D dV
  double psi_integral = 0.0;      // int_{B_R} psi^{2p} D dV
  double deficit_bound = 0.0;      // C(n,p) int_{B_R} rho^p D dV

  nlohmann::json to_json() const;
};

PetersenResult petersen_volume_bound(const ModelManifold& model, const FunctionSpec& G, double n, double p,
                                     double r0, double R);

}  // namespace koforge
