#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "koforge/scenario.hpp"

namespace koforge {

enum class TaskStatus { ok, failed_check, error, skipped };
std::string to_string(TaskStatus s);

struct TaskResult {
  std::string name;  // task type
  std::size_t index = 0;
  TaskStatus status = TaskStatus::ok;
  nlohmann::json data = nlohmann::json::object();
  std::optional<std::string> csv;  // written as <name>_<index>.csv

  std::string csv_name() const { return name + "_" + std::to_string(index) + ".csv"; }
  nlohmann::json to_json() const;
};

struct RunOptions {
  bool strict = false;  // a "no" verdict fails the run (exit 2) and skips later tasks
  std::optional<int> grid;
  std::optional<long long> seed;
};

struct RunReport {
  std::string scenario;
  std::vector<TaskResult> tasks;
  NumericSettings numeric;
  bool strict = false;

  // 0 when every task succeeded, 2 on a failed check in strict mode, 1 on errors.
  int exit_code() const;
  nlohmann::json to_json() const;
};

nlohmann::json versions();

TaskResult run_task(const Scenario& scenario, std::size_t index);
RunReport run_scenario(Scenario scenario, const RunOptions& options = {});

// Writes report.json (sorted keys, 2-space indent) and one CSV per task that produced one.
void emit_report(const RunReport& report, const std::string& dir);

}  // namespace koforge
