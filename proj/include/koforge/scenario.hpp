#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "koforge/geometry.hpp"
#include "koforge/numerics.hpp"
#include "koforge/structural.hpp"

namespace koforge {

inline constexpr int kMaxGridPoints = 1000000;

struct NumericSettings {
  int grid_points = 4096;       // supersolution profiles and glued solutions
  LogGrid log_grid;             // sampled structural decisions
  double t_max = 1e6;           // horizon of negKO profiles
  int geometry_points = 4001;   // solve_h grid
  std::optional<long long> seed;

  void validate() const;
  nlohmann::json to_json() const;
};

struct ModelBlock {
  ModelManifold manifold;
  FunctionSpec G = FunctionSpec::constant(0.0);

  nlohmann::json to_json() const;
};

enum class TaskType { conditions, ko, supersolution, counterexample, geometry, maxprin };
std::string to_string(TaskType t);
TaskType task_type_from_string(const std::string& s);

struct TaskSpec {
  TaskType type = TaskType::conditions;
  nlohmann::json options = nlohmann::json::object();  // task keys other than "type" and "profile"
  std::optional<StructuralProfile> profile;           // overrides the scenario profile

  nlohmann::json to_json() const;
};

struct Scenario {
  std::string name;
  std::optional<StructuralProfile> profile;
  std::optional<ModelBlock> model;
  std::vector<TaskSpec> tasks;
  NumericSettings numeric;
  std::optional<std::string> output;

  // Rejects unknown keys, malformed blocks and tasks whose prerequisites are missing.
  static Scenario from_json(const nlohmann::json& j);
  static Scenario parse(const std::string& text);
  static Scenario load(const std::string& path);
  void validate() const;
  nlohmann::json to_json() const;

  // The profile a task runs on, or nullptr.
  const StructuralProfile* profile_for(const TaskSpec& task) const;
};

StructuralProfile profile_from_json(const nlohmann::json& j);
ModelBlock model_from_json(const nlohmann::json& j);

// Throws PreconditionError naming the first key of j outside `allowed`.
void require_known_keys(const nlohmann::json& j, const std::vector<std::string>& allowed, const std::string& where);

}  // namespace koforge
