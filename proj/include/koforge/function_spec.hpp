#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace koforge {

// t^exponent * log(t)^log_exponent as t -> infinity.
struct PowerLaw {
  double exponent = 0.0;
  double log_exponent = 0.0;

  friend bool operator==(const PowerLaw&, const PowerLaw&) = default;
};

struct AsymptoticHints {
  std::optional<double> origin_exponent;  // ~ t^a as t -> 0+
  std::optional<PowerLaw> tail;           // ~ t^a log^b t as t -> infinity
  // True when the function is a product/power of power-type factors, so that
  // the derivative behaves like a * f / t wherever the exponent a is nonzero.
  bool regularly_varying = false;
};

namespace detail {
struct Node;
}

// Immutable univariate function on [0, inf). Copies share the underlying node.
class FunctionSpec {
 public:
  enum class Family {
    power,
    power_log,
    mean_curvature,
    exp_power,
    constant,
    exponential,
    sinh,
    sin,
    log1p_power,
    table,
    composite,
    custom,
  };

  FunctionSpec();  // constant 1

  static FunctionSpec power(double c, double a);
  static FunctionSpec power_log(double c, double a, double beta);
  static FunctionSpec mean_curvature();
  static FunctionSpec exp_power();
  static FunctionSpec constant(double c);
  // c * exp(k t)
  static FunctionSpec exponential(double c, double k);
  // sinh(B t) / B
  static FunctionSpec sinh(double B);
  // sin(B t) / B
  static FunctionSpec sin(double B);
  // c * log(1 + t^a)
  static FunctionSpec log1p_power(double c, double a);
  // Monotone cubic (Fritsch-Carlson) interpolation, held flat outside the range.
  static FunctionSpec table(std::vector<double> t, std::vector<double> v);
  // derivs[k] is the (k+1)-th derivative; missing orders fall back to finite differences.
  static FunctionSpec custom(std::string name, std::function<double(double)> value,
                             std::vector<std::function<double(double)>> derivs = {},
                             AsymptoticHints hints = {});

  static FunctionSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  double operator()(double t) const { return value(t); }
  double value(double t) const;
  // log of the value, computed without overflow where the family allows it.
  double log_value(double t) const;
  double derivative(double t, int order = 1) const;
  bool has_exact_derivative(int order = 1) const;
  FunctionSpec derivative_spec() const;

  const AsymptoticHints& hints() const { return hints_; }
  std::optional<double> origin_exponent() const { return hints_.origin_exponent; }
  std::optional<double> tail_exponent() const;
  std::optional<double> tail_log_exponent() const;

  Family family() const;
  std::string describe() const;
  // Scalar parameters of a built-in family (c, a, beta, ...) in declaration order.
  const std::vector<double>& parameters() const;

  FunctionSpec pow(double e) const;
  FunctionSpec scaled(double c) const;
  friend FunctionSpec operator*(const FunctionSpec& a, const FunctionSpec& b);
  friend FunctionSpec operator+(const FunctionSpec& a, const FunctionSpec& b);

 private:
  FunctionSpec(std::shared_ptr<const detail::Node> node, int order);
  double raw(double t, int order) const;

  std::shared_ptr<const detail::Node> node_;
  int order_ = 0;
  AsymptoticHints hints_;
};

// Fourth-order central difference with relative step max(1e-6, 1e-6 t);
// switches to a one-sided stencil when the central one would leave [0, inf).
double finite_difference(const std::function<double(double)>& fn, double t);
double finite_difference(const std::function<double(double)>& fn, double t, double rel_step);

}  // namespace koforge
