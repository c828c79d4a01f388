#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "koforge/function_spec.hpp"
#include "koforge/structural.hpp"
#include "koforge/tabulated.hpp"

namespace koforge {

enum class Verdict { convergent, divergent, inconclusive };
enum class Endpoint { zero, infinity };
enum class VerdictMethod { exact_exponent, numeric_tail };
enum class Kernel { K, Khat };
enum class KoVariant { KO, Khat_O, rhoKO, rhoKhatO };

std::string to_string(Verdict v);
std::string to_string(Endpoint e);
std::string to_string(VerdictMethod m);
std::string to_string(Kernel k);
std::string to_string(KoVariant v);
KoVariant ko_variant_from_string(const std::string& s);

struct EvidenceRow {
  double limit = 0.0;
  double value = 0.0;
};

struct ConvergenceVerdict {
  Verdict verdict = Verdict::inconclusive;
  Endpoint endpoint = Endpoint::infinity;
  std::optional<double> fitted_exponent;
  std::vector<EvidenceRow> evidence;
  VerdictMethod method = VerdictMethod::numeric_tail;

  nlohmann::json to_json() const;
};

struct ClassifyOptions {
  bool allow_exact = true;
  double band = 0.1;        // half-width of the Inconclusive band around exponent -1
  double log_fit_tol = 0.02;  // |a + 1| below which the log-power coefficient decides
  int doublings = 16;       // evidence limits T0 * 2^k, k = 1..doublings
  int fit_doublings = 10;   // slope is fitted over the last this-many doublings
  double t_start = 10.0;    // T0 for the tail at infinity
  double zero_start = 1.0;  // upper end for the behavior at 0+
};

// Exponent arithmetic: t^a log^b t at infinity, or t^a at 0+.
ConvergenceVerdict classify_exponent_at_infinity(PowerLaw tail);
ConvergenceVerdict classify_exponent_at_zero(double origin_exponent);

ConvergenceVerdict classify_numeric(const RealFn& value, const RealFn& log_value, Endpoint endpoint,
                                    const ClassifyOptions& opts = {});

ConvergenceVerdict classify_improper(const FunctionSpec& integrand, Endpoint endpoint,
                                     const ClassifyOptions& opts = {});

// Kernel integrands: t phi'(t)/ell(t) for K, phi(t)/ell(t) for Khat.
FunctionSpec kernel_integrand(const FunctionSpec& phi, const FunctionSpec& ell, Kernel kernel);

MonotoneMap make_primitive(const FunctionSpec& f, double lower = 0.0, MapOptions opts = {});
// Kernel map; checks integrability at 0 first and names the failing condition.
MonotoneMap make_kernel_map(const FunctionSpec& phi, const FunctionSpec& ell, Kernel kernel, MapOptions opts = {});

double compute_F(const FunctionSpec& f, double t);
double compute_Fhat(const FunctionSpec& f, const FunctionSpec& rho, double omega, double t);
double compute_K(const FunctionSpec& phi, const FunctionSpec& ell, double t, Kernel kernel = Kernel::K);
double invert_monotone(const MonotoneMap& map, double y);

// Shared tabulations for one profile and kernel: K (or Khat), F (or Fhat) and
// the inner primitive of rho. The sigma scaling only rescales the argument of
// the inverse kernel map, so one set of tables serves every sigma.
class KoTransforms {
 public:
  KoTransforms(const StructuralProfile& profile, Kernel kernel, bool use_rho);

  Kernel kernel() const { return kernel_; }
  bool uses_rho() const { return use_rho_; }
  const MonotoneMap& kernel_map() const { return K_; }
  const MonotoneMap& primitive() const { return F_; }

  // F, R and K^{-1} interpolate the knot tables (see MonotoneMap::forward_interp).
  double F(double s) const { return F_.forward_interp(s); }
  double R(double s) const;  // integral of rho over [0, s]; 0 when rho is off
  double Kinv(double y) const { return K_.inverse_interp(y); }
  double Kinv_sigmaF(double s, double sigma) const { return Kinv(sigma * F(s)); }
  // e^{R(s)} / K^{-1}(sigma Fhat(s))
  double integrand(double s, double sigma) const;
  double log_integrand(double s, double sigma) const;
  // dK/dx: x phi'(x)/ell(x), or phi(x)/ell(x) for Khat
  double kernel_derivative(double x) const;

 private:
  StructuralProfile profile_;
  Kernel kernel_;
  bool use_rho_;
  std::optional<MonotoneMap> Rmap_;
  MonotoneMap K_;
  MonotoneMap F_;
};

ConvergenceVerdict classify_ko(const StructuralProfile& profile, KoVariant variant, double sigma_scale = 1.0,
                               const ClassifyOptions& opts = {});

}  // namespace koforge
