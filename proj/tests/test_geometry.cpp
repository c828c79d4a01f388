#include <doctest.h>

#include <cmath>
#include <numbers>

#include "koforge/error.hpp"
#include "koforge/geometry.hpp"
#include "koforge/numerics.hpp"

using namespace koforge;

namespace {

constexpr double kPi = std::numbers::pi;

ModelManifold flat(int m, double n, FunctionSpec log_weight = FunctionSpec::constant(0.0)) {
  ModelManifold M;
  M.m = m;
  M.n = n;
  M.log_weight = log_weight;
  return M;
}

ModelManifold hyperbolic(int m, double n) {
  ModelManifold M = flat(m, n);
  M.warp = FunctionSpec::sinh(1.0);
  return M;
}

std::vector<double> radii(double lo, double hi, int k) {
  std::vector<double> r;
  for (int i = 0; i < k; ++i) r.push_back(lo + (hi - lo) * i / (k - 1));
  return r;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("comparison ODE closed forms") {
    auto lin = solve_h(FunctionSpec::constant(0.0), 5.0);
    for (double r : {0.5, 2.0, 5.0}) CHECK(lin.eval(r).first == doctest::Approx(r).epsilon(1e-12));
    auto sh = solve_h(FunctionSpec::constant(1.0), 5.0);
    CHECK(sh.eval(2.0).first == doctest::Approx(std::sinh(2.0)).epsilon(1e-8));
    for (double r = 0.0; r <= 5.0; r += 0.01) CHECK(std::abs(sh.eval(r).first - std::sinh(r)) <= 1e-8 * std::max(1.0, std::sinh(r)));
    CHECK_FALSE(sh.first_zero);
    for (double hp : sh.h_prime) CHECK(hp >= 1.0);
    auto sn = solve_h(FunctionSpec::constant(-1.0), 5.0);
    REQUIRE(sn.first_zero);
    CHECK(*sn.first_zero == doctest::Approx(kPi).epsilon(1e-8));
    CHECK(sn.eval(1.0).first == doctest::Approx(std::sin(1.0)).epsilon(1e-10));
    CHECK(sn.h.front() == 0.0);
    CHECK(sn.h_prime.front() == 1.0);
  }

  TEST_CASE("laplacian comparison bound") {
    auto lin = solve_h(FunctionSpec::constant(0.0), 5.0);
    CHECK(lr_comparison_bound(lin, 4.0, 2.0) == doctest::Approx(1.5).epsilon(1e-10));
    const double B = 1.5;
    auto sh = solve_h(FunctionSpec::constant(B * B), 4.0);
    for (double r : {0.3, 1.0, 3.0})
      CHECK(lr_comparison_bound(sh, 3.0, r) == doctest::Approx(2.0 * B / std::tanh(B * r)).epsilon(1e-8));
    CHECK(lr_comparison_bound(sh, 3.0, 1e-3) * 1e-3 == doctest::Approx(2.0).epsilon(1e-5));
  }

  TEST_CASE("model drift laplacian and curvature") {
    for (double r : {0.5, 1.0, 2.0}) {
      CHECK(model_Lr(flat(3, 4.0), r) == doctest::Approx(2.0 / r));
      auto gauss = flat(3, 4.0, FunctionSpec::power(-1.0, 2.0));
      CHECK(model_Lr(gauss, r) == doctest::Approx(2.0 / r - 2.0 * r));
      CHECK(model_Lr(hyperbolic(2, 3.0), r) == doctest::Approx(1.0 / std::tanh(r)));
      CHECK(ricci_nm_radial(flat(3, 4.0), r) == doctest::Approx(0.0));
      CHECK(ricci_nm_radial(flat(3, 4.0, FunctionSpec::power(-1.0, 2.0)), r) == doctest::Approx(2.0 - 4.0 * r * r));
      CHECK(ricci_nm_radial(hyperbolic(3, 4.0), r) == doctest::Approx(-2.0));
    }
  }

  TEST_CASE("riccati inequality") {
    auto c = check_riccati_inequality(flat(2, 3.0), 0.1, 5.0);
    CHECK(c.max_residual <= 0.0);
    CHECK(c.max_residual == doctest::Approx(-0.5 / 25.0).epsilon(1e-6));
    CHECK(check_riccati_inequality(hyperbolic(2, 3.0), 0.1, 5.0).max_residual <= 1e-12);
    // with h_w = r^2 the full residual is -(1/r - 2r)^2 / 2; dropping h_w'^2/(n-m) adds 4 r^2
    auto w = flat(2, 3.0, FunctionSpec::power(1.0, 2.0));
    CHECK(check_riccati_inequality(w, 0.1, 5.0).max_residual <= 1e-9);
    CHECK(check_riccati_inequality(w, 0.1, 5.0, 512, true).max_residual > 1.0);
  }

  TEST_CASE("bochner identity") {
    auto u = FunctionSpec::power(0.5, 2.0);
    CHECK(verify_bochner_radial(flat(3, 4.0), u, 0.1, 5.0).max_mismatch < 1e-8);
    CHECK(verify_bochner_radial(flat(3, 4.0, FunctionSpec::power(-1.0, 2.0)), u, 0.1, 5.0).max_mismatch < 1e-6);
    CHECK(verify_bochner_radial(flat(2, 3.0), FunctionSpec::power(1.0, 1.0), 0.5, 5.0).max_mismatch < 1e-6);
  }

  TEST_CASE("volume tables") {
    auto sol = solve_h(FunctionSpec::constant(0.0), 4.0);
    auto tab = volume_table(flat(3, 4.0), sol, {0.5, 1.0, 2.0});
    CHECK(tab.area_D[1] == doctest::Approx(4.0 * kPi).epsilon(1e-10));
    CHECK(tab.ball_D[1] == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-8));
    for (int m : {2, 3, 4}) {
      auto t = volume_table(flat(m, m + 1.0), sol, {1.0, 2.0, 3.0});
      double unit_ball = std::pow(kPi, m / 2.0) / std::tgamma(m / 2.0 + 1.0);
      for (std::size_t i = 0; i < 3; ++i)
        CHECK(t.ball_D[i] == doctest::Approx(unit_ball * std::pow(t.radii[i], m)).epsilon(1e-8));
    }
    auto hs = volume_table(hyperbolic(2, 3.0), sol, {1.0, 2.5});
    CHECK(hs.area_D[1] == doctest::Approx(2.0 * kPi * std::sinh(2.5)).epsilon(1e-10));

    auto lw = flat(2, 3.0, FunctionSpec::log1p_power(1.0, 2.0));
    auto lt = volume_table(lw, sol, {1.0, 2.0, 3.0});
    double oracle = integrate([](double r) { return 2.0 * kPi * r * (1.0 + r * r); }, 0.0, 3.0);
    CHECK(lt.ball_D[2] == doctest::Approx(oracle).epsilon(1e-8));
    CHECK(lt.ball_D[2] == doctest::Approx(2.0 * kPi * (4.5 + 81.0 / 4.0)).epsilon(1e-8));
    CHECK(tab.to_csv().substr(0, tab.to_csv().find('\n')).find("ratio_ball") != std::string::npos);
  }

  TEST_CASE("volume ratio monotonicity") {
    auto zero = solve_h(FunctionSpec::constant(0.0), 4.0);
    auto r = radii(0.25, 4.0, 16);
    CHECK(check_ratio_monotonicity(volume_table(flat(3, 4.0), zero, r)).monotone);
    auto one = solve_h(FunctionSpec::constant(1.0), 4.0);
    CHECK(check_ratio_monotonicity(volume_table(hyperbolic(2, 3.0), one, r)).monotone);
    auto gauss = flat(2, 3.0, FunctionSpec::power(-1.0, 2.0));
    auto g2 = solve_h(FunctionSpec::power(2.0, 2.0), 4.0);
    CHECK(check_ratio_monotonicity(volume_table(gauss, g2, r)).monotone);

    auto cubic = flat(2, 3.0, FunctionSpec::power(1.0, 3.0));
    auto bad = check_ratio_monotonicity(volume_table(cubic, zero, r));
    CHECK_FALSE(bad.monotone);
    REQUIRE(bad.first_violation);
    CHECK(*bad.first_violation > 0.0);
  }

  TEST_CASE("petersen constant") {
    CHECK(petersen_constant(3.0, 2.0) == 36.0);
    CHECK(petersen_constant(4.0, 3.0) == doctest::Approx(3375.0 / 8.0).epsilon(1e-14));
    CHECK_THROWS_AS(petersen_constant(4.0, 2.0), PreconditionError);
    CHECK(petersen_constant(3.0, 1.5 + 1e-6) == doctest::Approx(std::pow(2.0 * (2.0 + 2e-6) / 2e-6, 1.5 + 1e-6)).epsilon(1e-9));
  }

  TEST_CASE("petersen volume bound") {
    auto b2 = petersen_volume_bound(flat(2, 3.0), FunctionSpec::constant(0.0), 3.0, 2.0, 0.5, 2.0);
    auto b4 = petersen_volume_bound(flat(2, 3.0), FunctionSpec::constant(0.0), 3.0, 2.0, 0.5, 4.0);
    CHECK(b2.ricci_deficit == 0.0);
    CHECK(b2.bound == doctest::Approx(b4.bound).epsilon(1e-10));
    CHECK(b2.bound == doctest::Approx(kPi * 0.25 / (0.125 / 3.0)).epsilon(1e-8));

    // h_w = 0.1 r^2 pushes Lr above 2/r past r = sqrt(5), so psi is nonzero on [0.5, 5]
    auto pert = flat(2, 3.0, FunctionSpec::power(0.1, 2.0));
    auto pr = petersen_volume_bound(pert, FunctionSpec::constant(0.0), 3.0, 2.0, 0.5, 5.0);
    CHECK(pr.psi_integral > 0.0);
    CHECK(pr.psi_integral <= pr.deficit_bound * (1.0 + 1e-8));
    CHECK(pr.actual_ratio <= pr.bound);
  }
}
