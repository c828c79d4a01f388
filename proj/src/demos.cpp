#include "koforge/demos.hpp"

#include <algorithm>
#include <filesystem>

#include "koforge/error.hpp"
#include "koforge/report.hpp"

namespace koforge {

using nlohmann::json;

namespace {

json power(double c, double a) { return {{"family", "power"}, {"c", c}, {"a", a}}; }
json constant(double c) { return {{"family", "constant"}, {"c", c}}; }

json ko_task(const json& profile, const json& extra = json::object()) {
  json t = {{"type", "ko"}, {"profile", profile}};
  for (auto& [k, v] : extra.items()) t[k] = v;
  return t;
}

Scenario scenario(const json& j) { return Scenario::from_json(j); }

Demo ko_threshold() {
  json tasks = json::array();
  for (double q : {0.5, 1.0, 1.5, 3.0})
    tasks.push_back(ko_task({{"phi", power(1, 1)}, {"ell", constant(1)}, {"f", power(1, q)}}));
  return {"ko_threshold", "f = t^q with phi = t, ell = 1: Divergent for q <= 1, Convergent for q > 1",
          {scenario({{"name", "power_nonlinearity"}, {"tasks", tasks}})}};
}

Demo log_refinement() {
  json tasks = json::array();
  for (double b : {1.0, 2.0, 3.0}) {
    json prof = {{"phi", power(1, 1)},
                 {"ell", constant(1)},
                 {"f", {{"family", "power_log"}, {"c", 1}, {"a", 1}, {"beta", b}}}};
    tasks.push_back(ko_task(prof));
    tasks.push_back(ko_task(prof, {{"exact", false}}));
  }
  return {"log_refinement", "f = t log^b(1+t): the threshold sits at b = 2",
          {scenario({{"name", "log_refined_nonlinearity"}, {"tasks", tasks}})}};
}

Demo closed_form_supersolution() {
  json tasks = json::array();
  for (double c : {1.0, 3.0})
    tasks.push_back({{"type", "supersolution"},
                     {"profile", {{"phi", power(1, 1)}, {"ell", constant(1)}, {"f", power(c, 2)}}},
                     {"sigma", 1.0},
                     {"epsilon", 1.0},
                     {"t0", 0.0},
                     {"t1", 0.5},
                     {"eta", 10.0},
                     {"A_geom", 0.0}});
  return {"closed_form_supersolution", "phi = t, ell = 1, f = c t^2: alpha = 6/(c (sqrt(6/c) - t)^2)",
          {scenario({{"name", "quadratic_nonlinearity"}, {"tasks", tasks}})}};
}

Demo blowup_dichotomy() {
  json tasks = json::array();
  for (double s : {1.5, 2.0})
    tasks.push_back({{"type", "supersolution"},
                     {"profile", {{"phi", power(1, 1)}, {"ell", constant(1)}, {"f", power(1, s)}, {"theta", 0.0}}},
                     {"ko_mode", "KO"},
                     {"t0", 1.0},
                     {"t1", 1.5},
                     {"A_geom", 0.0},
                     {"grid_points", 1024}});
  for (double c : {0.3, 0.7})
    tasks.push_back({{"type", "supersolution"},
                     {"profile", {{"phi", power(1, 1)}, {"ell", constant(1)}, {"f", power(1, c)}, {"theta", 0.0}}},
                     {"ko_mode", "negKO"},
                     {"t0", 1.0},
                     {"t1", 2.0},
                     {"A_geom", 0.0},
                     {"grid_points", 1024}});
  return {"blowup_dichotomy", "KO builds blow up at a finite T_sigma, negKO builds stay finite and unbounded",
          {scenario({{"name", "blowup_battery"}, {"tasks", tasks}})}};
}

Demo counterexample() {
  json prof = {{"phi", power(1, 1)}, {"ell", constant(1)}, {"f", power(1, 1)}};
  json tasks = json::array();
  tasks.push_back({{"type", "counterexample"}, {"p", 2.0}, {"m", 2}, {"lambda", 1.2}, {"r_max", 8.0}});
  tasks.push_back({{"type", "counterexample"}, {"p", 2.0}, {"m", 2}, {"r_max", 8.0}});
  return {"counterexample", "entire subsolution of Delta u = u glued from e^r and a quadratic cap",
          {scenario({{"name", "linear_nonlinearity"}, {"profile", prof}, {"tasks", tasks}})}};
}

json model(int m, double n, const json& warp, const json& log_weight, const json& G) {
  return {{"m", m}, {"n", n}, {"warp", warp}, {"log_weight", log_weight}, {"G", G}};
}

Demo comparison_geometry() {
  json geo = {{{"type", "geometry"}, {"r_max", 4.0}, {"riccati", true}}};
  std::vector<Scenario> s;
  s.push_back(scenario(
      {{"name", "flat"}, {"model", model(3, 4.0, power(1, 1), constant(0), constant(0))}, {"tasks", geo}}));
  s.push_back(scenario({{"name", "hyperbolic"},
                        {"model", model(2, 3.0, {{"family", "sinh"}, {"B", 1}}, constant(0), constant(1))},
                        {"tasks", geo}}));
  s.push_back(scenario(
      {{"name", "gaussian_weight"}, {"model", model(2, 3.0, power(1, 1), power(-1, 2), power(2, 2))}, {"tasks", geo}}));
  s.push_back(scenario(
      {{"name", "cubic_weight_violating"}, {"model", model(2, 3.0, power(1, 1), power(1, 3), constant(0))}, {"tasks", geo}}));
  return {"comparison_geometry", "Sturm comparison and monotone volume ratios on model manifolds", s};
}

Demo petersen_wei() {
  std::vector<Scenario> s;
  s.push_back(scenario({{"name", "quadratic_weight"},
                        {"model", model(2, 3.0, power(1, 1), power(0.1, 2), constant(0))},
                        {"tasks", {{{"type", "geometry"},
                                    {"r_max", 2.0},
                                    {"petersen", {{"p", 2.0}, {"r0", 0.5}, {"R", 2.0}}}}}}}));
  s.push_back(scenario(
      {{"name", "hyperbolic_log_weight"},
       {"model", model(2, 3.0, {{"family", "sinh"}, {"B", 1}}, {{"family", "log1p_power"}, {"c", 1}, {"a", 2}},
                       constant(1))},
       {"tasks", {{{"type", "geometry"}, {"r_max", 5.0}, {"petersen", {{"p", 2.0}, {"r0", 0.5}, {"R", 5.0}}}}}}}));
  return {"petersen_wei", "integral curvature volume bound; the constant C(3,2) is 36", s};
}

Demo equivalence() {
  json tasks = json::array();
  for (double q : {0.5, 2.0})
    tasks.push_back(ko_task({{"phi", power(1, 1)}, {"ell", constant(1)}, {"f", power(1, q)}},
                            {{"variants", {"KO"}}, {"sigma_scales", {0.25, 1.0, 4.0}}}));
  for (double w : {0.0, 1.0, 2.0})
    tasks.push_back(ko_task({{"phi", power(1, 1)},
                             {"ell", constant(1)},
                             {"f", power(1, 2)},
                             {"rho", {{"family", "composite"},
                                      {"op", "power"},
                                      {"base", {{"family", "composite"},
                                                {"op", "sum"},
                                                {"terms", {constant(1), power(1, 2)}}}},
                                      {"exponent", -1}}},
                             {"omega", w}},
                            {{"variants", {"KO", "rhoKO"}}}));
  return {"equivalence", "KO verdicts are invariant under sigma scaling and under an integrable rho twist",
          {scenario({{"name", "ko_equivalences"}, {"tasks", tasks}})}};
}

Demo weak_maximum_principle() {
  json tasks = json::array();
  tasks.push_back({{"type", "maxprin"}, {"sigma_growth", 1.0}, {"delta", 1.0}, {"chi", 0.0}, {"mu", -1.0}, {"d0", 1.0}});
  tasks.push_back({{"type", "maxprin"},
                   {"sigma_growth", 1.5},
                   {"delta", 2.0},
                   {"chi", 0.0},
                   {"mu", 0.0},
                   {"d0", 3.0},
                   {"sharpness", {{"p", 3.0}, {"m", 3}, {"r_lo", 0.1}, {"r_hi", 1000.0}}}});
  tasks.push_back({{"type", "maxprin"},
                   {"sigma_growth", 2.0},
                   {"delta", 1.0},
                   {"chi", 0.0},
                   {"mu", 0.0},
                   {"d0", 3.0},
                   {"volume_radii", {10.0, 31.6227766016838, 100.0, 316.227766016838, 1000.0}}});
  return {"weak_maximum_principle", "weak maximum principle constants and the sharpness of the growth bound",
          {scenario({{"name", "flat_space_constants"},
                     {"model", model(3, 4.0, power(1, 1), constant(0), constant(0))},
                     {"tasks", tasks}})}};
}

Demo p_laplacian_conditions() {
  json prof = {{"phi", power(1, 1)}, {"ell", constant(1)}, {"f", power(1, 2)}, {"beta", 2.0}, {"mu", 0.0}};
  json tasks = {{{"type", "conditions"}, {"checks", {"phi", "grad_ell", "phi_ell"}}, {"regimes", {"p_laplacian_power"}}}};
  return {"p_laplacian_conditions", "p = 2, q = 0, mu = 0, beta = 2 satisfies the p-Laplacian parameter window",
          {scenario({{"name", "laplacian_window"}, {"profile", prof}, {"tasks", tasks}})}};
}

}  // namespace

std::vector<std::string> demo_names() {
  return {"ko_threshold",  "log_refinement", "closed_form_supersolution", "blowup_dichotomy",
          "counterexample", "comparison_geometry", "petersen_wei",         "equivalence",
          "weak_maximum_principle", "p_laplacian_conditions"};
}

Demo builtin_demo(const std::string& name) {
  if (name == "ko_threshold") return ko_threshold();
  if (name == "log_refinement") return log_refinement();
  if (name == "closed_form_supersolution") return closed_form_supersolution();
  if (name == "blowup_dichotomy") return blowup_dichotomy();
  if (name == "counterexample") return counterexample();
  if (name == "comparison_geometry") return comparison_geometry();
  if (name == "petersen_wei") return petersen_wei();
  if (name == "equivalence") return equivalence();
  if (name == "weak_maximum_principle") return weak_maximum_principle();
  if (name == "p_laplacian_conditions") return p_laplacian_conditions();
  throw PreconditionError("unknown demo '" + name + "'");
}

int run_demo(const std::string& name, const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> names = name == "all" ? demo_names() : std::vector<std::string>{name};
  int worst = 0;
  for (const auto& n : names) {
    Demo d = builtin_demo(n);
    for (const auto& s : d.scenarios) {
      RunReport rep = run_scenario(s);
      emit_report(rep, (fs::path(dir) / n / s.name).string());
      worst = std::max(worst, rep.exit_code());
    }
  }
  return worst;
}

}  // namespace koforge
