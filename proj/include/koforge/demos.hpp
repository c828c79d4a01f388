#pragma once

#include <string>
#include <vector>

#include "koforge/scenario.hpp"

namespace koforge {

struct Demo {
  std::string name;
  std::string summary;
  std::vector<Scenario> scenarios;
};

std::vector<std::string> demo_names();  // without "all"
Demo builtin_demo(const std::string& name);

// Runs one demo (or "all") into dir/<demo>/<scenario>/; returns the worst exit code.
int run_demo(const std::string& name, const std::string& dir);

}  // namespace koforge
