#include <doctest.h>

#include <cmath>

#include "koforge/error.hpp"
#include "koforge/structural.hpp"

using namespace koforge;

namespace {

StructuralProfile plap(double p, double q) {
  StructuralProfile s;
  s.phi = FunctionSpec::power(1.0, p - 1.0);
  s.ell = q == 0.0 ? FunctionSpec::constant(1.0) : FunctionSpec::power(1.0, q);
  return s;
}

Truth holds(const ConditionReport& r, const std::string& name) { return r.at(name).holds; }

}  // namespace

TEST_SUITE("structural") {
  TEST_CASE("c-increasing estimates") {
    auto mono = estimate_c_increasing(FunctionSpec::power(1, 2));
    CHECK(mono.holds);
    CHECK(mono.constant == doctest::Approx(1.0));

    auto wiggly = FunctionSpec::custom("t^2 (2 + sin t)", [](double t) { return t * t * (2.0 + std::sin(t)); });
    auto est = estimate_c_increasing(wiggly, LogGrid{1e-3, 1e3, 4096});
    CHECK(est.holds);
    CHECK(est.constant >= 1.0);
    CHECK(est.constant <= 3.0);
    // brute force over a dense linear grid as the oracle
    double brute = 1.0, running_max = 0.0;
    for (double t = 1e-3; t <= 1e3; t += 1e-3) {
      double v = t * t * (2.0 + std::sin(t));
      running_max = std::max(running_max, v);
      brute = std::max(brute, running_max / v);
    }
    CHECK(est.constant == doctest::Approx(brute).epsilon(2e-2));

    auto decay = estimate_c_increasing(FunctionSpec::exponential(1.0, -1.0));
    CHECK_FALSE(decay.holds);
    CHECK(decay.witness.first < decay.witness.second);

    CHECK_THROWS_AS(estimate_c_increasing(FunctionSpec::power(-1.0, 1.0)), PreconditionError);
  }

  TEST_CASE("phi conditions") {
    auto r = check_phi(plap(2, 0));
    CHECK(holds(r, "Phi0") == Truth::yes);
    CHECK(holds(r, "Phi1") == Truth::yes);
    CHECK(*r.at("Phi1").constant == doctest::Approx(1.0));
    CHECK(r.at("Phi0").method == Method::exact);

    StructuralProfile mc;
    mc.phi = FunctionSpec::mean_curvature();
    CHECK(holds(check_phi(mc), "Phi2") == Truth::yes);
    StructuralProfile ep;
    ep.phi = FunctionSpec::exp_power();
    auto epr = check_phi(ep);
    CHECK(holds(epr, "Phi2") == Truth::no);
    CHECK_FALSE(epr.at("Phi2").witness.empty());
  }

  TEST_CASE("gradient term conditions") {
    auto sq = plap(2, 0.5);
    sq.chi = 0.5;
    auto r = check_grad_ell(sq);
    for (const char* n : {"L1", "L2", "L3"}) CHECK(holds(r, n) == Truth::yes);
    CHECK(*r.at("L3").constant == doctest::Approx(1.0));
    CHECK(holds(check_grad_ell(plap(2, 0)), "L2") == Truth::yes);
    StructuralProfile dec = plap(2, 0);
    dec.ell = FunctionSpec::exponential(1.0, -1.0);
    auto dr = check_grad_ell(dec);
    CHECK(holds(dr, "L2") == Truth::no);
    CHECK_FALSE(dr.at("L2").witness.empty());
  }

  TEST_CASE("theta condition follows theta >= q - p + 2") {
    auto a = plap(3, 0);
    a.theta = 0.0;
    auto ra = check_theta(a);
    CHECK(holds(ra, "theta_1") == Truth::yes);
    CHECK(holds(ra, "theta_2") == Truth::yes);

    auto b = plap(2, 1);
    b.theta = 0.0;
    auto rb = check_theta(b);
    CHECK((holds(rb, "theta_1") == Truth::no || holds(rb, "theta_2") == Truth::no));

    StructuralProfile mc;
    mc.phi = FunctionSpec::mean_curvature();
    mc.ell = FunctionSpec::power(1.0, 0.5);
    mc.theta = 1.5;
    CHECK(holds(check_theta(mc), "theta_2") == Truth::yes);
  }

  TEST_CASE("theta property over exponents") {
    for (double p : {1.5, 2.0, 3.0, 4.0})
      for (double q : {0.0, 0.25, 1.0})
        for (double th : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
          auto s = plap(p, q);
          s.theta = th;
          auto r = check_theta(s);
          bool expected = th >= q - p + 2.0 - 1e-12;
          bool got = holds(r, "theta_1") == Truth::yes && holds(r, "theta_2") == Truth::yes;
          CHECK(got == expected);
        }
  }

  TEST_CASE("phi over ell integrability") {
    auto r31 = check_phi_ell(plap(3, 1));
    for (const char* n : {"phi_ell_1", "phi_ell_2"}) CHECK(holds(r31, n) == Truth::yes);
    auto r21 = check_phi_ell(plap(2, 1));
    CHECK(holds(r21, "phi_ell_1") == Truth::no);

    StructuralProfile mc;
    mc.phi = FunctionSpec::mean_curvature();
    auto rm = check_phi_ell(mc);
    CHECK(holds(rm, "phi_ell_2") == Truth::no);
    CHECK(holds(rm, "phi_ell_3") == Truth::yes);
  }

  TEST_CASE("b_tilde conditions") {
    auto s = plap(2, 0);
    s.b_tilde = FunctionSpec::power(1.0, -2.0);
    s.lambda_b = 0.5;
    CHECK(holds(check_b_tilde(s), "b_lambda_not_integrable") == Truth::yes);
    s.b_tilde = FunctionSpec::constant(1.0);
    s.lambda_b = 1.0;
    CHECK(holds(check_b_tilde(s), "b_lambda_not_integrable") == Truth::yes);
    s.b_tilde = FunctionSpec::exponential(1.0, -1.0);
    auto r = check_b_tilde(s);
    CHECK(holds(r, "b_lambda_not_integrable") == Truth::no);
    CHECK_FALSE(r.at("b_lambda_not_integrable").witness.empty());
  }

  TEST_CASE("parameter regimes") {
    auto s = plap(2, 0);
    s.theta = 0.0;
    s.beta = -2.0;
    s.mu = 0.0;
    CHECK(holds(check_parameter_regimes(s, RegimeKind::theta_beta_mu), "theta_beta_mu") == Truth::yes);

    s.beta = 2.0;
    CHECK(holds(check_parameter_regimes(s, RegimeKind::p_laplacian_power), "p_laplacian_power") == Truth::yes);
    s.beta = 2.5;
    CHECK(holds(check_parameter_regimes(s, RegimeKind::p_laplacian_power), "p_laplacian_power") == Truth::no);

    StructuralProfile mc;
    mc.phi = FunctionSpec::mean_curvature();
    mc.beta = 0.0;
    for (double q : {0.0, 0.5})
      for (double mu : {0.0, 1.0}) {
        mc.ell = q == 0.0 ? FunctionSpec::constant(1) : FunctionSpec::power(1, q);
        mc.mu = mu;
        auto r = check_parameter_regimes(mc, RegimeKind::mean_curvature_power);
        CHECK(holds(r, "mean_curvature_power") == Truth::no);
        CHECK_FALSE(r.at("mean_curvature_power").witness.empty());
      }
    mc.ell = FunctionSpec::constant(1);
    mc.mu = 0.0;
    mc.beta = -2.0;
    CHECK(holds(check_parameter_regimes(mc, RegimeKind::mean_curvature_power), "mean_curvature_power") ==
          Truth::yes);
  }

  TEST_CASE("report invariants") {
    std::vector<StructuralProfile> ps = {plap(2, 0), plap(3, 1), plap(2, 1)};
    StructuralProfile mc;
    mc.phi = FunctionSpec::mean_curvature();
    ps.push_back(mc);
    StructuralProfile ep;
    ep.phi = FunctionSpec::exp_power();
    ep.b_tilde = FunctionSpec::exponential(1.0, -1.0);
    ps.push_back(ep);
    for (auto& p : ps) {
      p.normalize();
      auto r = check_all(p);
      for (const auto& e : r.entries) {
        if (e.holds == Truth::no) CHECK_MESSAGE(!e.witness.empty(), e.name);
      }
      auto j = r.to_json();
      for (const auto& e : r.entries) CHECK(j.at(e.name).contains("method"));
    }
  }

  TEST_CASE("normalize clamps beta and rejects lambda") {
    StructuralProfile s;
    s.beta = -3.0;
    s.normalize();
    CHECK(s.beta == -2.0);
    CHECK_FALSE(s.warnings.empty());
    s.lambda_b = 0.0;
    CHECK_THROWS_AS(s.normalize(), PreconditionError);
  }
}
