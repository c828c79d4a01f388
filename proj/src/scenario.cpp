#include "koforge/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "koforge/error.hpp"

namespace koforge {

using nlohmann::json;

namespace {

const std::vector<std::string> kProfileKeys = {"phi",   "ell",   "f",     "b_tilde", "rho",   "g_fn",
                                               "h_fn",  "theta", "lambda_b", "beta", "mu",    "A_bound",
                                               "delta", "chi",   "omega", "c_increasing_tolerance"};

const std::vector<std::string>& task_keys(TaskType t) {
  static const std::vector<std::string> conditions = {"checks", "regimes"};
  static const std::vector<std::string> ko = {"variant", "variants", "sigma_scale", "sigma_scales", "exact"};
  static const std::vector<std::string> super = {"kernel", "rho_mode", "ko_mode", "epsilon", "eta",    "t0",
                                                 "t1",     "A_geom",   "sigma",   "grid_points", "t_max"};
  static const std::vector<std::string> counter = {"p", "m", "r_max", "points", "lambda"};
  static const std::vector<std::string> geometry = {"r_max", "radii", "riccati", "petersen"};
  static const std::vector<std::string> maxprin = {"sigma_growth", "delta",      "chi",        "mu",
                                                   "d0",           "A_bound",    "f_liminf_positive",
                                                   "u_little_o",   "sup_finite", "volume_radii", "sharpness"};
  switch (t) {
    case TaskType::conditions: return conditions;
    case TaskType::ko: return ko;
    case TaskType::supersolution: return super;
    case TaskType::counterexample: return counter;
    case TaskType::geometry: return geometry;
    case TaskType::maxprin: return maxprin;
  }
  return conditions;
}

double number(const json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_number()) throw PreconditionError(where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

std::optional<FunctionSpec> opt_fn(const json& j, const std::string& key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return FunctionSpec::from_json(j.at(key));
}

}  // namespace

void require_known_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw PreconditionError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw PreconditionError(where + ": unknown key '" + k + "'");
  }
}

void NumericSettings::validate() const {
  if (grid_points < 2 || grid_points > kMaxGridPoints)
    throw PreconditionError("numeric.grid_points must lie in [2, 1e6]");
  if (geometry_points < 3 || geometry_points > kMaxGridPoints)
    throw PreconditionError("numeric.geometry_points must lie in [3, 1e6]");
  if (log_grid.points < 2 || log_grid.points > kMaxGridPoints)
    throw PreconditionError("numeric.log_grid.points must lie in [2, 1e6]");
  if (!(log_grid.lo > 0.0) || !(log_grid.hi > log_grid.lo))
    throw PreconditionError("numeric.log_grid needs 0 < lo < hi");
  if (!(t_max > 0.0)) throw PreconditionError("numeric.t_max must be positive");
}

json NumericSettings::to_json() const {
  return {{"grid_points", grid_points},
          {"log_grid", {{"lo", log_grid.lo}, {"hi", log_grid.hi}, {"points", log_grid.points}}},
          {"t_max", t_max},
          {"geometry_points", geometry_points},
          {"seed", seed ? json(*seed) : json(nullptr)}};
}

json ModelBlock::to_json() const {
  json j = manifold.to_json();
  j["G"] = G.to_json();
  return j;
}

std::string to_string(TaskType t) {
  switch (t) {
    case TaskType::conditions: return "conditions";
    case TaskType::ko: return "ko";
    case TaskType::supersolution: return "supersolution";
    case TaskType::counterexample: return "counterexample";
    case TaskType::geometry: return "geometry";
    case TaskType::maxprin: return "maxprin";
  }
  return "?";
}

TaskType task_type_from_string(const std::string& s) {
  for (TaskType t : {TaskType::conditions, TaskType::ko, TaskType::supersolution, TaskType::counterexample,
                     TaskType::geometry, TaskType::maxprin})
    if (to_string(t) == s) return t;
  throw PreconditionError("unknown task type '" + s + "'");
}

json TaskSpec::to_json() const {
  json j = options;
  j["type"] = to_string(type);
  if (profile) j["profile"] = profile->to_json();
  return j;
}

StructuralProfile profile_from_json(const json& j) {
  require_known_keys(j, kProfileKeys, "profile");
  StructuralProfile p;
  if (j.contains("phi")) p.phi = FunctionSpec::from_json(j.at("phi"));
  if (j.contains("ell")) p.ell = FunctionSpec::from_json(j.at("ell"));
  if (j.contains("f")) p.f = FunctionSpec::from_json(j.at("f"));
  if (j.contains("b_tilde")) p.b_tilde = FunctionSpec::from_json(j.at("b_tilde"));
  p.rho = opt_fn(j, "rho");
  p.g_fn = opt_fn(j, "g_fn");
  p.h_fn = opt_fn(j, "h_fn");
  auto scalar = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = number(j, key, "profile");
  };
  scalar("theta", p.theta);
  scalar("lambda_b", p.lambda_b);
  scalar("beta", p.beta);
  scalar("mu", p.mu);
  scalar("A_bound", p.A_bound);
  scalar("delta", p.delta);
  scalar("chi", p.chi);
  scalar("omega", p.omega);
  scalar("c_increasing_tolerance", p.c_increasing_tolerance);
  p.normalize();
  return p;
}

ModelBlock model_from_json(const json& j) {
  require_known_keys(j, {"m", "n", "warp", "log_weight", "G"}, "model");
  ModelBlock b;
  if (j.contains("m")) {
    if (!j.at("m").is_number_integer()) throw PreconditionError("model: 'm' must be an integer");
    b.manifold.m = j.at("m").get<int>();
  }
  if (j.contains("n")) b.manifold.n = number(j, "n", "model");
  if (j.contains("warp")) b.manifold.warp = FunctionSpec::from_json(j.at("warp"));
  if (j.contains("log_weight")) b.manifold.log_weight = FunctionSpec::from_json(j.at("log_weight"));
  if (j.contains("G")) b.G = FunctionSpec::from_json(j.at("G"));
  b.manifold.validate();
  return b;
}

Scenario Scenario::from_json(const json& j) {
  require_known_keys(j, {"name", "profile", "model", "tasks", "numeric", "output"}, "scenario");
  Scenario s;
  if (!j.contains("name") || !j.at("name").is_string()) throw PreconditionError("scenario needs a 'name' string");
  s.name = j.at("name").get<std::string>();
  if (j.contains("profile")) s.profile = profile_from_json(j.at("profile"));
  if (j.contains("model")) s.model = model_from_json(j.at("model"));
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw PreconditionError("scenario: 'output' must be a string");
    s.output = j.at("output").get<std::string>();
  }
  if (j.contains("numeric")) {
    const json& n = j.at("numeric");
    require_known_keys(n, {"grid_points", "log_grid", "t_max", "geometry_points", "seed"}, "numeric");
    if (n.contains("grid_points")) s.numeric.grid_points = n.at("grid_points").get<int>();
    if (n.contains("geometry_points")) s.numeric.geometry_points = n.at("geometry_points").get<int>();
    if (n.contains("t_max")) s.numeric.t_max = number(n, "t_max", "numeric");
    if (n.contains("seed") && !n.at("seed").is_null()) s.numeric.seed = n.at("seed").get<long long>();
    if (n.contains("log_grid")) {
      const json& g = n.at("log_grid");
      require_known_keys(g, {"lo", "hi", "points"}, "numeric.log_grid");
      if (g.contains("lo")) s.numeric.log_grid.lo = number(g, "lo", "numeric.log_grid");
      if (g.contains("hi")) s.numeric.log_grid.hi = number(g, "hi", "numeric.log_grid");
      if (g.contains("points")) s.numeric.log_grid.points = g.at("points").get<int>();
    }
  }
  if (j.contains("tasks")) {
    if (!j.at("tasks").is_array()) throw PreconditionError("scenario: 'tasks' must be an array");
    for (std::size_t i = 0; i < j.at("tasks").size(); ++i) {
      const json& t = j.at("tasks")[i];
      const std::string where = "task " + std::to_string(i);
      if (!t.is_object() || !t.contains("type") || !t.at("type").is_string())
        throw PreconditionError(where + " needs a 'type' string");
      TaskSpec spec;
      spec.type = task_type_from_string(t.at("type").get<std::string>());
      std::vector<std::string> allowed = task_keys(spec.type);
      allowed.push_back("type");
      allowed.push_back("profile");
      require_known_keys(t, allowed, where + " (" + to_string(spec.type) + ")");
      for (const auto& [k, v] : t.items())
        if (k != "type" && k != "profile") spec.options[k] = v;
      if (t.contains("profile")) spec.profile = profile_from_json(t.at("profile"));
      s.tasks.push_back(std::move(spec));
    }
  }
  s.validate();
  return s;
}

Scenario Scenario::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw PreconditionError(std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("scenario has a malformed value: ") + e.what());
  }
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot read scenario file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str());
}

const StructuralProfile* Scenario::profile_for(const TaskSpec& task) const {
  if (task.profile) return &*task.profile;
  return profile ? &*profile : nullptr;
}

void Scenario::validate() const {
  numeric.validate();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const TaskSpec& t = tasks[i];
    const std::string where = "task " + std::to_string(i) + " (" + to_string(t.type) + ")";
    switch (t.type) {
      case TaskType::conditions:
      case TaskType::ko:
      case TaskType::supersolution:
      case TaskType::counterexample:
        if (!profile_for(t)) throw PreconditionError(where + " needs a 'profile' block");
        break;
      case TaskType::geometry:
        if (!model) throw PreconditionError(where + " needs a 'model' block");
        break;
      case TaskType::maxprin:
        if (t.options.contains("volume_radii") && !model)
          throw PreconditionError(where + " with volume_radii needs a 'model' block");
        break;
    }
    for (const char* key : {"grid_points", "points"})
      if (t.options.contains(key)) {
        const json& v = t.options.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 2 || v.get<long long>() > kMaxGridPoints)
          throw PreconditionError(where + ": '" + key + "' must be an integer in [2, 1e6]");
      }
  }
}

json Scenario::to_json() const {
  json j = {{"name", name}, {"numeric", numeric.to_json()}};
  if (profile) j["profile"] = profile->to_json();
  if (model) j["model"] = model->to_json();
  json t = json::array();
  for (const auto& task : tasks) t.push_back(task.to_json());
  j["tasks"] = t;
  if (output) j["output"] = *output;
  return j;
}

}  // namespace koforge
