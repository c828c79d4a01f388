#include "koforge/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <boost/version.hpp>

#include "koforge/counterexample.hpp"
#include "koforge/error.hpp"
#include "koforge/geometry.hpp"
#include "koforge/maxprin.hpp"
#include "koforge/supersolution.hpp"
#include "koforge/transforms.hpp"

namespace koforge {

using nlohmann::json;

namespace {

double num(const json& o, const char* key, double dflt) {
  if (!o.contains(key)) return dflt;
  if (!o.at(key).is_number()) throw PreconditionError(std::string("option '") + key + "' must be a number");
  return o.at(key).get<double>();
}

int integer(const json& o, const char* key, int dflt) {
  if (!o.contains(key)) return dflt;
  if (!o.at(key).is_number_integer()) throw PreconditionError(std::string("option '") + key + "' must be an integer");
  return o.at(key).get<int>();
}

bool flag(const json& o, const char* key, bool dflt) {
  if (!o.contains(key)) return dflt;
  if (!o.at(key).is_boolean()) throw PreconditionError(std::string("option '") + key + "' must be a boolean");
  return o.at(key).get<bool>();
}

std::string text(const json& o, const char* key, const std::string& dflt) {
  if (!o.contains(key)) return dflt;
  if (!o.at(key).is_string()) throw PreconditionError(std::string("option '") + key + "' must be a string");
  return o.at(key).get<std::string>();
}

std::vector<double> numbers(const json& o, const char* key) {
  if (!o.contains(key)) return {};
  if (!o.at(key).is_array()) throw PreconditionError(std::string("option '") + key + "' must be an array");
  return o.at(key).get<std::vector<double>>();
}

Kernel kernel_from_string(const std::string& s) {
  if (s == "K") return Kernel::K;
  if (s == "Khat") return Kernel::Khat;
  throw PreconditionError("unknown kernel '" + s + "'");
}

std::vector<std::string> failed_entries(const ConditionReport& r) {
  std::vector<std::string> out;
  for (const auto& e : r.entries)
    if (e.holds == Truth::no && e.name.find('.') == std::string::npos) out.push_back(e.name);
  return out;
}

void run_conditions(const Scenario& sc, const TaskSpec& t, TaskResult& res) {
  const StructuralProfile& p = *sc.profile_for(t);
  const LogGrid& g = sc.numeric.log_grid;
  ConditionReport r;
  std::vector<std::string> groups = {"all"};
  if (t.options.contains("checks")) groups = t.options.at("checks").get<std::vector<std::string>>();
  for (const auto& name : groups) {
    if (name == "all") r.merge(check_all(p, g));
    else if (name == "phi") r.merge(check_phi(p, g));
    else if (name == "grad_ell") r.merge(check_grad_ell(p, g));
    else if (name == "theta") r.merge(check_theta(p, g));
    else if (name == "phi_ell") r.merge(check_phi_ell(p, g));
    else if (name == "b_tilde") r.merge(check_b_tilde(p, g));
    else throw PreconditionError("unknown check group '" + name + "'");
  }
  if (t.options.contains("regimes"))
    for (const auto& name : t.options.at("regimes").get<std::vector<std::string>>())
      r.merge(check_parameter_regimes(p, regime_kind_from_string(name), g));
  res.data = r.to_json();
  res.data["failed"] = failed_entries(r);
  res.data["warnings"] = p.warnings;
}

void run_ko(const Scenario& sc, const TaskSpec& t, TaskResult& res) {
  const StructuralProfile& p = *sc.profile_for(t);
  std::vector<std::string> variants = {text(t.options, "variant", "KO")};
  if (t.options.contains("variants")) variants = t.options.at("variants").get<std::vector<std::string>>();
  std::vector<double> scales = {num(t.options, "sigma_scale", 1.0)};
  if (t.options.contains("sigma_scales")) scales = numbers(t.options, "sigma_scales");
  ClassifyOptions opts;
  opts.allow_exact = flag(t.options, "exact", true);
  json rows = json::array();
  std::optional<Verdict> common;
  bool agree = true;
  for (const auto& v : variants)
    for (double s : scales) {
      ConvergenceVerdict cv = classify_ko(p, ko_variant_from_string(v), s, opts);
      rows.push_back({{"variant", v}, {"sigma_scale", s}, {"verdict", cv.to_json()}});
      if (cv.verdict == Verdict::inconclusive) continue;
      if (common && *common != cv.verdict) agree = false;
      common = cv.verdict;
    }
  res.data = {{"verdicts", rows}, {"agree", agree}};
}

void run_supersolution(const Scenario& sc, const TaskSpec& t, TaskResult& res) {
  const json& o = t.options;
  BuildRequest req;
  req.profile = *sc.profile_for(t);
  req.kernel = kernel_from_string(text(o, "kernel", "K"));
  req.rho_mode = flag(o, "rho_mode", false);
  req.ko_mode = ko_mode_from_string(text(o, "ko_mode", "KO"));
  req.epsilon = num(o, "epsilon", req.epsilon);
  req.eta = num(o, "eta", req.eta);
  req.t0 = num(o, "t0", req.t0);
  req.t1 = num(o, "t1", req.t1);
  req.A_geom = num(o, "A_geom", req.A_geom);
  req.grid_points = integer(o, "grid_points", sc.numeric.grid_points);
  req.t_max = num(o, "t_max", sc.numeric.t_max);
  res.data["request"] = req.to_json();
  if (o.contains("sigma")) {
    SupersolutionBuilder b(req);
    RadialProfile prof = b.build_alpha(num(o, "sigma", 1.0));
    res.data["profile"] = prof.metadata();
    res.data["N_sigma"] = b.compute_Nsigma(prof.sigma, prof).to_json();
    res.data["threshold"] = {{"T", b.threshold().T}, {"scale", b.threshold().scale}};
    res.csv = prof.to_csv();
  } else {
    SearchResult s = search_sigma(req);
    json sj = s.to_json();
    for (auto& [k, v] : sj.items()) res.data[k] = v;
    res.csv = s.profile.to_csv();
  }
}

void run_counterexample(const Scenario& sc, const TaskSpec& t, TaskResult& res) {
  const json& o = t.options;
  const StructuralProfile& p = *sc.profile_for(t);
  CounterexampleProblem prob;
  prob.p = num(o, "p", 2.0);
  prob.m = integer(o, "m", 2);
  prob.f = p.f;
  prob.ell = p.ell;
  WProfile w(prob);
  GlueParams params;
  json probes = json::array();
  if (o.contains("lambda")) {
    GlueProbe pr = probe_glue(w, num(o, "lambda", 1.5), &params);
    probes.push_back(pr.to_json());
    if (!pr.passed()) throw NumericalError("glue lambda " + std::to_string(pr.lambda) + " fails: " + pr.note);
  } else {
    GlueSearch s = solve_glue_params(w);
    for (const auto& pr : s.probes) probes.push_back(pr.to_json());
    params = s.params;
  }
  GluedSolution glued = assemble_u(w, params, num(o, "r_max", 10.0), integer(o, "points", 2048));
  res.data = {{"problem", prob.to_json()},
              {"not_ko_verdict", to_string(w.not_ko_verdict())},
              {"probes", probes},
              {"glued", glued.to_json()},
              {"min_residual", verify_subsolution(glued)}};
  res.csv = glued.to_csv();
}

void run_geometry(const Scenario& sc, const TaskSpec& t, TaskResult& res) {
  const json& o = t.options;
  const ModelBlock& mb = *sc.model;
  const double r_max = num(o, "r_max", 5.0);
  ComparisonSolution sol = solve_h(mb.G, r_max, sc.numeric.geometry_points);
  const double r_hi = sol.first_zero ? std::min(r_max, *sol.first_zero * (1 - 1e-9)) : r_max;
  std::vector<double> radii = numbers(o, "radii");
  if (radii.empty())
    for (int i = 1; i <= 64; ++i) radii.push_back(r_hi * i / 64.0);
  VolumeTable table = volume_table(mb.manifold, sol, radii);
  MonotonicityCheck mono = check_ratio_monotonicity(table);
  bool bound_holds = true;
  double worst_gap = 0.0;
  for (double r : radii) {
    double gap = ricci_nm_radial(mb.manifold, r) + (mb.manifold.n - 1.0) * mb.G.value(r);
    worst_gap = std::min(worst_gap, gap);
    if (gap < -1e-9) bound_holds = false;
  }
  res.data = {{"model", mb.to_json()},
              {"first_zero", sol.first_zero ? json(*sol.first_zero) : json(nullptr)},
              {"curvature_bound_holds", bound_holds},
              {"curvature_bound_gap", worst_gap},
              {"ratios_monotone", mono.monotone},
              {"first_violation", mono.first_violation ? json(*mono.first_violation) : json(nullptr)},
              {"violation_column", mono.column}};
  if (flag(o, "riccati", false)) {
    RiccatiCheck rc = check_riccati_inequality(mb.manifold, std::max(1e-3, r_hi / 1000.0), r_hi);
    res.data["riccati"] = {{"max_residual", rc.max_residual}, {"at", rc.at}};
  }
  if (o.contains("petersen")) {
    const json& pj = o.at("petersen");
    require_known_keys(pj, {"p", "r0", "R", "n"}, "petersen");
    const double n = num(pj, "n", mb.manifold.n), p = num(pj, "p", 2.0);
    PetersenResult pr = petersen_volume_bound(mb.manifold, mb.G, n, p, num(pj, "r0", 0.5), num(pj, "R", 2.0));
    res.data["petersen"] = pr.to_json();
    res.data["petersen"]["constant"] = petersen_constant(n, p);
  }
  res.csv = table.to_csv();
}

void run_maxprin(const Scenario& sc, const TaskSpec& t, TaskResult& res) {
  const json& o = t.options;
  WmpParams w;
  w.sigma_growth = num(o, "sigma_growth", w.sigma_growth);
  w.delta = num(o, "delta", w.delta);
  w.chi = num(o, "chi", w.chi);
  w.mu = num(o, "mu", w.mu);
  w.d0 = num(o, "d0", w.d0);
  w.A_bound = num(o, "A_bound", w.A_bound);
  GrowthHypotheses hyp;
  hyp.f_liminf_positive = flag(o, "f_liminf_positive", hyp.f_liminf_positive);
  hyp.u_little_o = flag(o, "u_little_o", hyp.u_little_o);
  hyp.sup_finite = flag(o, "sup_finite", hyp.sup_finite);
  std::optional<VolumeCurve> curve;
  std::vector<double> vr = numbers(o, "volume_radii");
  if (!vr.empty()) curve = log_volume_curve(sc.model->manifold, vr);
  res.data = {{"params", w.to_json()},
              {"constant", wmp_constant(w).to_json()},
              {"threshold", growth_threshold(w, hyp, curve).to_json()}};
  if (o.contains("sharpness")) {
    const json& sj = o.at("sharpness");
    require_known_keys(sj, {"p", "m", "r_lo", "r_hi", "points"}, "sharpness");
    const double lo = num(sj, "r_lo", 0.1), hi = num(sj, "r_hi", 10.0);
    const int n = integer(sj, "points", 200);
    if (!(lo > 0.0 && hi > lo) || n < 2) throw PreconditionError("sharpness grid needs 0 < r_lo < r_hi, points >= 2");
    std::vector<double> grid;
    for (int i = 0; i < n; ++i) grid.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
    res.data["sharpness"] = sharpness_example(num(sj, "p", 2.0), integer(sj, "m", 3), grid).to_json();
  }
}

}  // namespace

std::string to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::ok: return "ok";
    case TaskStatus::failed_check: return "failed_check";
    case TaskStatus::error: return "error";
    case TaskStatus::skipped: return "skipped";
  }
  return "?";
}

json TaskResult::to_json() const {
  json d = data;
  if (csv) d["csv"] = csv_name();
  return {{"name", name}, {"index", index}, {"status", to_string(status)}, {"data", d}};
}

int RunReport::exit_code() const {
  bool failed_check = false;
  for (const auto& t : tasks) {
    if (t.status == TaskStatus::error) return 1;
    if (t.status == TaskStatus::failed_check) failed_check = true;
  }
  return failed_check ? 2 : 0;
}

json versions() {
  return {{"koforge", KOFORGE_VERSION},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

json RunReport::to_json() const {
  json t = json::array();
  for (const auto& r : tasks) t.push_back(r.to_json());
  json ns = numeric.to_json();
  ns["strict"] = strict;
  return {{"scenario", scenario}, {"tasks", t}, {"versions", versions()}, {"numeric_settings", ns}};
}

TaskResult run_task(const Scenario& sc, std::size_t index) {
  const TaskSpec& t = sc.tasks.at(index);
  TaskResult res;
  res.name = to_string(t.type);
  res.index = index;
  try {
    switch (t.type) {
      case TaskType::conditions: run_conditions(sc, t, res); break;
      case TaskType::ko: run_ko(sc, t, res); break;
      case TaskType::supersolution: run_supersolution(sc, t, res); break;
      case TaskType::counterexample: run_counterexample(sc, t, res); break;
      case TaskType::geometry: run_geometry(sc, t, res); break;
      case TaskType::maxprin: run_maxprin(sc, t, res); break;
    }
  } catch (const std::exception& e) {
    res.status = TaskStatus::error;
    res.data = {{"error", e.what()}};
    res.csv.reset();
  }
  return res;
}

RunReport run_scenario(Scenario sc, const RunOptions& opts) {
  if (opts.grid) sc.numeric.grid_points = *opts.grid;
  if (opts.seed) sc.numeric.seed = *opts.seed;
  sc.validate();
  RunReport rep;
  rep.scenario = sc.name;
  rep.numeric = sc.numeric;
  rep.strict = opts.strict;
  bool halted = false;
  for (std::size_t i = 0; i < sc.tasks.size(); ++i) {
    if (halted) {
      TaskResult skip;
      skip.name = to_string(sc.tasks[i].type);
      skip.index = i;
      skip.status = TaskStatus::skipped;
      skip.data = {{"reason", "an earlier condition check failed in strict mode"}};
      rep.tasks.push_back(skip);
      continue;
    }
    TaskResult r = run_task(sc, i);
    if (opts.strict && r.status == TaskStatus::ok && r.data.contains("failed") && !r.data.at("failed").empty()) {
      r.status = TaskStatus::failed_check;
      halted = true;
    }
    rep.tasks.push_back(std::move(r));
  }
  return rep;
}

void emit_report(const RunReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw PreconditionError("cannot create output directory " + dir + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
    if (!out) throw PreconditionError("cannot write " + (fs::path(dir) / name).string());
    out << content;
    if (!out) throw PreconditionError("write failed for " + (fs::path(dir) / name).string());
  };
  write("report.json", report.to_json().dump(2) + "\n");
  for (const auto& t : report.tasks)
    if (t.csv) write(t.csv_name(), *t.csv);
}

}  // namespace koforge
