#include <doctest.h>

#include <cmath>
#include <numbers>

#include "koforge/error.hpp"
#include "koforge/transforms.hpp"

using namespace koforge;

namespace {

StructuralProfile ko_profile(double p, double q, const FunctionSpec& f) {
  StructuralProfile s;
  s.phi = FunctionSpec::power(1.0, p - 1.0);
  s.ell = q == 0.0 ? FunctionSpec::constant(1.0) : FunctionSpec::power(1.0, q);
  s.f = f;
  return s;
}

// composite Simpson rule with n panels
double simpson(const std::function<double(double)>& g, double a, double b, int n) {
  double h = (b - a) / n, sum = g(a) + g(b);
  for (int i = 1; i < n; ++i) sum += g(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

ClassifyOptions numeric_only() {
  ClassifyOptions o;
  o.allow_exact = false;
  return o;
}

}  // namespace

TEST_SUITE("transforms") {
  TEST_CASE("primitive F") {
    CHECK(compute_F(FunctionSpec::power(1, 2), 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(compute_F(FunctionSpec::power(1, 2), 0.0) == 0.0);
    auto f = FunctionSpec::power_log(1, 1, 3);
    double oracle = simpson([&](double t) { return f(t); }, 0.0, 1.0, 1000000);
    CHECK(compute_F(f, 1.0) == doctest::Approx(oracle).epsilon(1e-11));
  }

  TEST_CASE("twisted primitive Fhat") {
    auto f = FunctionSpec::power(1, 2);
    CHECK(compute_Fhat(f, FunctionSpec::constant(0.0), 1.0, 2.0) == doctest::Approx(compute_F(f, 2.0)).epsilon(1e-12));
    auto rho = FunctionSpec::power(1, 2) + FunctionSpec::constant(1);
    CHECK(compute_Fhat(f, rho, 2.0, 1.5) == doctest::Approx(compute_F(f, 1.5)).epsilon(1e-12));
    CHECK(compute_Fhat(FunctionSpec::constant(1), FunctionSpec::constant(1), 1.0, 1.0) ==
          doctest::Approx(std::numbers::e - 1.0).epsilon(1e-12));
    CHECK_THROWS_AS(compute_Fhat(FunctionSpec::constant(1), FunctionSpec::constant(1), 0.0, 1000.0), NumericalError);
  }

  TEST_CASE("kernels and their inverses") {
    auto phi = FunctionSpec::power(1, 1);
    auto one = FunctionSpec::constant(1);
    CHECK(compute_K(phi, one, 2.0) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(compute_K(phi, one, 0.0) == 0.0);
    CHECK(compute_K(FunctionSpec::power(1, 2), one, 2.0) == doctest::Approx(2.0 * 8.0 / 3.0).epsilon(1e-13));
    auto mc = FunctionSpec::mean_curvature();
    CHECK(compute_K(mc, one, 1.0, Kernel::Khat) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-13));

    auto K = make_kernel_map(phi, one, Kernel::K);
    CHECK(invert_monotone(K, 2.0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(invert_monotone(K, 0.0) == 0.0);
    auto Kh = make_kernel_map(mc, one, Kernel::Khat);
    CHECK(invert_monotone(Kh, std::sqrt(2.0) - 1.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(make_kernel_map(FunctionSpec::power(1, -1), one, Kernel::Khat), PreconditionError);
  }

  TEST_CASE("improper integral classification") {
    auto inv2 = FunctionSpec::power(1, -2);
    auto inv1 = FunctionSpec::power(1, -1);
    CHECK(classify_improper(inv2, Endpoint::infinity).verdict == Verdict::convergent);
    CHECK(classify_improper(inv1, Endpoint::infinity).verdict == Verdict::divergent);
    CHECK(classify_improper(inv2, Endpoint::infinity, numeric_only()).verdict == Verdict::convergent);
    CHECK(classify_improper(inv1, Endpoint::infinity, numeric_only()).verdict != Verdict::convergent);

    auto bertrand = FunctionSpec::power(1, -1) * FunctionSpec::power_log(1, 0, -3);
    CHECK(classify_improper(bertrand, Endpoint::infinity).verdict == Verdict::convergent);
    auto v = classify_improper(bertrand, Endpoint::infinity, numeric_only());
    CHECK(v.verdict == Verdict::convergent);
    // oracle: substitute u = log t and sum decade by decade over ten decades
    auto in_u = [&](double u) { return std::exp(u) * bertrand(std::exp(u)); };
    const double lo = v.evidence.front().limit / 2.0, hi = v.evidence.back().limit;
    double partial = integrate(in_u, std::log(lo), std::log(hi));
    CHECK(v.evidence.back().value == doctest::Approx(partial).epsilon(1e-8));
    double decades = 0.0;
    for (int k = 1; k <= 10; ++k) decades += integrate(in_u, std::log(lo) + (k - 1) * std::log(10.0), std::log(lo) + k * std::log(10.0));
    // the remainder past lo 10^10 is below 1/(2 log^2(lo 10^10))
    CHECK(decades - partial > 0.0);
    CHECK(decades + 0.5 / std::pow(std::log(lo * 1e10), 2) > partial);

    CHECK(classify_improper(FunctionSpec::power(1, -0.5), Endpoint::zero).verdict == Verdict::convergent);
    CHECK(classify_improper(FunctionSpec::power(1, -1.5), Endpoint::zero, numeric_only()).verdict == Verdict::divergent);
  }

  TEST_CASE("verdict invariants") {
    for (double a : {-3.0, -1.5, -1.0, -0.5, 0.0}) {
      auto e = classify_exponent_at_infinity({a, 0.0});
      CHECK(e.verdict != Verdict::inconclusive);
      CHECK(e.method == VerdictMethod::exact_exponent);
      auto n = classify_improper(FunctionSpec::power(1, a), Endpoint::infinity, numeric_only());
      REQUIRE(n.evidence.size() >= 6);
      CHECK(std::log10(n.evidence.back().limit / n.evidence.front().limit) >= 4.0);
      auto j = n.to_json();
      CHECK(j.at("method") == "numeric-tail");
    }
  }

  TEST_CASE("KO threshold for p = 2, ell = 1") {
    for (double q : {0.5, 1.0, 1.5, 3.0}) {
      auto v = classify_ko(ko_profile(2, 0, FunctionSpec::power(1, q)), KoVariant::KO);
      CHECK(v.method == VerdictMethod::exact_exponent);
      CHECK(v.verdict == (q > 1.0 ? Verdict::convergent : Verdict::divergent));
    }
  }

  TEST_CASE("KO log refinement") {
    for (double b : {1.0, 2.0, 3.0}) {
      auto s = ko_profile(2, 0, FunctionSpec::power_log(1, 1, b));
      auto ex = classify_ko(s, KoVariant::KO);
      CHECK(ex.verdict == (b > 2.0 ? Verdict::convergent : Verdict::divergent));
      auto nu = classify_ko(s, KoVariant::KO, 1.0, numeric_only());
      if (b == 2.0) CHECK(nu.verdict != Verdict::convergent);
      else CHECK(nu.verdict == ex.verdict);
    }
  }

  TEST_CASE("KO threshold s + 1 > p - q, exact and numeric") {
    for (double p : {2.0, 3.0, 4.0})
      for (double q : {0.0, 0.5})
        for (double ds : {-0.6, 0.6}) {
          if (!(p > q + 1.0)) continue;
          double s = p - q - 1.0 + ds;
          if (s <= 0.0) continue;
          auto prof = ko_profile(p, q, FunctionSpec::power(1, s));
          Verdict want = ds > 0 ? Verdict::convergent : Verdict::divergent;
          CHECK(classify_ko(prof, KoVariant::KO).verdict == want);
          CHECK(classify_ko(prof, KoVariant::KO, 1.0, numeric_only()).verdict == want);
        }
  }

  TEST_CASE("sigma scaling and rho twists keep verdicts") {
    auto rho = FunctionSpec::power(1, 2) + FunctionSpec::constant(1);
    for (double s : {0.5, 2.0, 3.0}) {
      auto prof = ko_profile(2, 0, FunctionSpec::power(1, s));
      prof.rho = rho.pow(-1.0);
      auto base = classify_ko(prof, KoVariant::KO, 1.0, numeric_only()).verdict;
      for (double sc : {0.25, 4.0}) CHECK(classify_ko(prof, KoVariant::KO, sc, numeric_only()).verdict == base);
      for (double w : {0.0, 1.0, 2.0}) {
        prof.omega = w;
        CHECK(classify_ko(prof, KoVariant::rhoKO, 1.0, numeric_only()).verdict == base);
      }
    }
  }

  TEST_CASE("KO errors") {
    StructuralProfile mc;
    mc.phi = FunctionSpec::mean_curvature();
    mc.f = FunctionSpec::power(1, 2);
    CHECK_THROWS_WITH_AS(classify_ko(mc, KoVariant::KO), doctest::Contains("phi_ell_2"), PreconditionError);
    CHECK(classify_ko(mc, KoVariant::Khat_O).verdict == Verdict::convergent);
    CHECK_THROWS_AS(classify_ko(ko_profile(2, 0, FunctionSpec::power(1, 2)), KoVariant::rhoKO), PreconditionError);
  }

  TEST_CASE("exponential nonlinearity") {
    // 1/sqrt(2 e^t) is integrable; numeric tabulation overflows long before the evidence window ends
    auto p = ko_profile(2, 0, FunctionSpec::exponential(1, 1));
    auto v = classify_ko(p, KoVariant::KO);
    CHECK(v.verdict == Verdict::convergent);
    CHECK(v.method == VerdictMethod::exact_exponent);
    CHECK(classify_ko(p, KoVariant::KO, 1.0, numeric_only()).verdict == Verdict::inconclusive);
    CHECK(classify_ko(ko_profile(2, 0, FunctionSpec::exponential(1, -1)), KoVariant::KO).verdict ==
          Verdict::divergent);
  }

  TEST_CASE("KoTransforms closed forms") {
    auto prof = ko_profile(2, 0, FunctionSpec::power(3, 2));
    KoTransforms tr(prof, Kernel::K, false);
    for (double s : {0.01, 0.5, 1.0, 7.0, 1e3}) {
      CHECK(tr.F(s) == doctest::Approx(s * s * s).epsilon(1e-10));
      CHECK(tr.Kinv_sigmaF(s, 1.0) == doctest::Approx(std::sqrt(2.0 * s * s * s)).epsilon(1e-10));
      CHECK(tr.integrand(s, 0.5) == doctest::Approx(1.0 / std::sqrt(s * s * s)).epsilon(1e-10));
    }
  }
}
