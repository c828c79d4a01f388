#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "koforge/demos.hpp"
#include "koforge/error.hpp"
#include "koforge/report.hpp"
#include "koforge/scenario.hpp"

namespace {

void print_summary(const koforge::RunReport& rep, const std::string& dir) {
  for (const auto& t : rep.tasks) {
    std::cout << t.index << ' ' << t.name << ' ' << koforge::to_string(t.status);
    if (t.status == koforge::TaskStatus::error) std::cout << ": " << t.data.value("error", std::string());
    std::cout << '\n';
  }
  std::cout << "report: " << dir << "/report.json\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"koforge: Keller-Osserman conditions, radial barriers and comparison geometry"};
  app.set_version_flag("--version", std::string(KOFORGE_VERSION));
  app.require_subcommand(1);

  std::string scenario_path, out_dir, demo_name;
  bool strict = false;
  int grid = 0;
  long long seed = 0;

  auto* run = app.add_subcommand("run", "run a scenario and write report.json plus CSV profiles");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--out", out_dir, "output directory (default: the scenario's 'output' or koforge_out)");
  run->add_flag("--strict", strict, "a failed hypothesis check stops later tasks and exits with 2");
  auto* grid_opt = run->add_option("--grid", grid, "override numeric.grid_points")->check(CLI::Range(2, 1000000));
  auto* seed_opt = run->add_option("--seed", seed, "recorded in the report; runs are deterministic");

  auto* check = app.add_subcommand("check", "validate a scenario without running it");
  check->add_option("scenario", scenario_path, "scenario JSON file")->required();

  auto* demo = app.add_subcommand("demo", "run a built-in demo scenario ('all' runs every demo, 'list' names them)");
  demo->add_option("name", demo_name, "demo name")->required();
  demo->add_option("--out", out_dir, "output directory (default: demo_out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      koforge::Scenario sc = koforge::Scenario::load(scenario_path);
      koforge::RunOptions opts;
      opts.strict = strict;
      if (*grid_opt) opts.grid = grid;
      if (*seed_opt) opts.seed = seed;
      koforge::RunReport rep = koforge::run_scenario(sc, opts);
      std::string dir = !out_dir.empty() ? out_dir : sc.output.value_or("koforge_out");
      koforge::emit_report(rep, dir);
      print_summary(rep, dir);
      return rep.exit_code();
    }
    if (*check) {
      koforge::Scenario sc = koforge::Scenario::load(scenario_path);
      std::cout << "ok: scenario '" << sc.name << "' with " << sc.tasks.size() << " task(s)\n";
      return 0;
    }
    if (*demo) {
      if (demo_name == "list") {
        for (const auto& n : koforge::demo_names())
          std::cout << n << ": " << koforge::builtin_demo(n).summary << '\n';
        return 0;
      }
      std::string dir = out_dir.empty() ? "demo_out" : out_dir;
      int code = koforge::run_demo(demo_name, dir);
      std::cout << "demo " << demo_name << " written to " << dir << " (exit " << code << ")\n";
      return code;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
