#include <doctest.h>

#include <cmath>

#include "koforge/error.hpp"
#include "koforge/function_spec.hpp"
#include "koforge/numerics.hpp"

using namespace koforge;

namespace {

std::vector<FunctionSpec> builtins() {
  return {FunctionSpec::power(2.0, 1.5),       FunctionSpec::power(1.0, -0.5),
          FunctionSpec::power_log(1.0, 1.0, 3.0), FunctionSpec::mean_curvature(),
          FunctionSpec::constant(4.0),         FunctionSpec::exponential(1.0, -0.5),
          FunctionSpec::sinh(1.0),             FunctionSpec::log1p_power(1.0, 2.0),
          FunctionSpec::power(1, 2) * FunctionSpec::power_log(1, 0, 1) + FunctionSpec::constant(1)};
}

}  // namespace

TEST_SUITE("function_spec") {
  TEST_CASE("family values") {
    CHECK(FunctionSpec::power(2.0, 3.0)(2.0) == doctest::Approx(16.0));
    CHECK(FunctionSpec::power_log(1.0, 1.0, 2.0)(std::exp(1.0) - 1.0) == doctest::Approx(std::exp(1.0) - 1.0));
    CHECK(FunctionSpec::mean_curvature()(1.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(FunctionSpec::exp_power()(1.0) == doctest::Approx(std::exp(1.0)));
    CHECK(FunctionSpec::sinh(2.0)(1.0) == doctest::Approx(std::sinh(2.0) / 2.0));
    CHECK(FunctionSpec::constant(3.0)(1e5) == 3.0);
  }

  TEST_CASE("built-ins are finite on (0, 1e6]") {
    LogGrid g{1e-6, 1e6, 400};
    for (const auto& f : builtins()) {
      if (f.family() == FunctionSpec::Family::sinh) continue;
      for (double t : g.nodes()) CHECK_MESSAGE(std::isfinite(f(t)), f.describe() << " at " << t);
    }
    // exponential growth overflows a double; the log stays finite
    for (const auto& f : {FunctionSpec::exp_power(), FunctionSpec::sinh(1.0)})
      for (double t : g.nodes()) CHECK_MESSAGE(std::isfinite(f.log_value(t)), f.describe() << " at " << t);
  }

  TEST_CASE("exact derivatives agree with central differences") {
    LogGrid g{1e-2, 1e2, 50};
    for (const auto& f : builtins()) {
      if (!f.has_exact_derivative()) continue;
      for (double t : g.nodes()) {
        double fd = finite_difference([&](double x) { return f(x); }, t);
        double ex = f.derivative(t);
        CHECK(std::abs(fd - ex) <= 1e-6 * std::max(1.0, std::abs(ex)));
      }
    }
  }

  // the oracle is the fitted slope of the hinted t^a log^b t itself, since log factors
  // move the secant slope away from a on any finite window
  TEST_CASE("tail hints match fitted slopes on [1e3, 1e6]") {
    std::vector<FunctionSpec> fs = {FunctionSpec::power(1.0, 2.5), FunctionSpec::power(3.0, -1.2),
                                    FunctionSpec::power_log(1.0, 1.0, 2.0), FunctionSpec::mean_curvature(),
                                    FunctionSpec::power(1, 1) * FunctionSpec::power(1, 0.5).pow(-2.0)};
    for (const auto& f : fs) {
      REQUIRE(f.tail_exponent());
      LogGrid g{1e3, 1e6, 40};
      const double a = *f.tail_exponent(), b = f.tail_log_exponent().value_or(0.0);
      std::vector<double> x, y, h;
      for (double t : g.nodes()) {
        x.push_back(std::log(t));
        y.push_back(f.log_value(t));
        h.push_back(a * std::log(t) + b * std::log(std::log(t)));
      }
      CHECK(std::abs(fit_slope(x, y) - fit_slope(x, h)) <= 0.05);
      if (b == 0.0) CHECK(std::abs(fit_slope(x, y) - a) <= 0.05);
    }
  }

  TEST_CASE("composites carry hints") {
    auto g = FunctionSpec::power(1, 2) * FunctionSpec::constant(1).pow(-1.0);
    CHECK(*g.tail_exponent() == doctest::Approx(2.0));
    CHECK(*g.origin_exponent() == doctest::Approx(2.0));
    auto h = FunctionSpec::power_log(1, 1, 3).pow(-0.5);
    CHECK(*h.tail_exponent() == doctest::Approx(-0.5));
    CHECK(*h.tail_log_exponent() == doctest::Approx(-1.5));
  }

  TEST_CASE("table family interpolates monotonically") {
    auto tab = FunctionSpec::table({0.0, 1.0, 2.0, 4.0}, {0.0, 1.0, 4.0, 16.0});
    CHECK(tab(2.0) == doctest::Approx(4.0));
    double prev = -1.0;
    for (double t = 0.0; t <= 5.0; t += 0.05) {
      CHECK(tab(t) >= prev);
      prev = tab(t);
    }
    CHECK(tab(10.0) == doctest::Approx(16.0));
  }

  TEST_CASE("json round trip and rejection") {
    nlohmann::json j = {{"family", "power_log"}, {"c", 2.0}, {"a", 1.0}, {"beta", 3.0}};
    auto f = FunctionSpec::from_json(j);
    CHECK(f(5.0) == doctest::Approx(FunctionSpec::from_json(f.to_json())(5.0)));
    CHECK_THROWS_AS(FunctionSpec::from_json({{"family", "power"}, {"c", 1.0}}), PreconditionError);
    CHECK_THROWS_AS(FunctionSpec::from_json({{"family", "power"}, {"a", 1.0}, {"bogus", 1}}), PreconditionError);
    CHECK_THROWS_AS(FunctionSpec::from_json({{"family", "nope"}}), PreconditionError);
  }
}
