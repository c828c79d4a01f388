#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "koforge/error.hpp"
#include "koforge/numerics.hpp"
#include "koforge/tabulated.hpp"

using namespace koforge;

TEST_SUITE("numerics") {
  TEST_CASE("integrate matches closed forms") {
    CHECK(integrate([](double t) { return t * t; }, 0.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(integrate([](double t) { return std::exp(t); }, 0.0, 1.0) ==
          doctest::Approx(std::numbers::e - 1.0).epsilon(1e-14));
    // sharp peak forces subdivision
    auto peak = [](double t) { return 1.0 / (1e-4 + (t - 0.3) * (t - 0.3)); };
    double exact = 100.0 * (std::atan(0.7 / 1e-2) + std::atan(0.3 / 1e-2));
    CHECK(integrate(peak, 0.0, 1.0, 1e-12) == doctest::Approx(exact).epsilon(1e-10));
    CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
  }

  TEST_CASE("integrate_singular handles endpoint singularities") {
    CHECK(integrate_singular([](double t) { return 1.0 / std::sqrt(t); }, 0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(integrate_singular([](double t) { return std::pow(t, -0.9); }, 0.0, 1.0) == doctest::Approx(10.0).epsilon(1e-6));
  }

  TEST_CASE("bracket_root and fit_slope") {
    CHECK(bracket_root([](double x) { return x * x - 2.0; }, 0.0, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(bracket_root([](double x) { return x * x + 1.0; }, 0.0, 2.0), NumericalError);
    std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
    CHECK(fit_slope(x, y) == doctest::Approx(2.0));
    std::vector<double> z{0.5, 0.1, 0.7, 0.2}, w(4);
    for (int i = 0; i < 4; ++i) w[i] = -1.5 * x[i] + 0.75 * z[i] + 4.0;
    auto [a, b] = fit_two_slopes(x, z, w);
    CHECK(a == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(b == doctest::Approx(0.75).epsilon(1e-12));
  }

  TEST_CASE("log grid endpoints") {
    LogGrid g{1e-3, 1e3, 7};
    auto n = g.nodes();
    REQUIRE(n.size() == 7);
    CHECK(n.front() == doctest::Approx(1e-3));
    CHECK(n.back() == doctest::Approx(1e3));
    CHECK(n[3] == doctest::Approx(1.0));
  }
}

TEST_SUITE("numerics") {
  TEST_CASE("monotone map invariants on knots") {
    MonotoneMap m([](double t) { return 3.0 * t * t; });
    CHECK(m.forward(0.0) == 0.0);
    CHECK(m.forward(2.0) == doctest::Approx(8.0).epsilon(1e-12));
    m.extend_to(1e4);
    auto knots = m.knots();
    REQUIRE(knots.size() > 10);
    for (std::size_t i = 1; i < knots.size(); ++i) CHECK(knots[i].second > knots[i - 1].second);
    for (const auto& [t, y] : knots) {
      if (t == 0.0) continue;
      CHECK(m.inverse(y) == doctest::Approx(t).epsilon(1e-8));
    }
  }

  TEST_CASE("hermite interpolation is exact for power laws") {
    MonotoneMap m([](double t) { return 2.5 * std::pow(t, 1.5); });
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 4.0);
    for (int i = 0; i < 50; ++i) {
      double t = std::pow(10.0, u(rng));
      double exact = std::pow(t, 2.5);
      CHECK(m.forward_interp(t) == doctest::Approx(exact).epsilon(1e-10));
      CHECK(m.inverse_interp(exact) == doctest::Approx(t).epsilon(1e-10));
    }
  }

  TEST_CASE("tail map of t^-2") {
    TailMap tail([](double s) { return 1.0 / (s * s); }, 1.0);
    CHECK(tail.total() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(tail(10.0) == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(tail(1e8) == doctest::Approx(1e-8).epsilon(1e-8));
    CHECK(tail.inverse(0.01) == doctest::Approx(100.0).epsilon(1e-9));
  }
}
