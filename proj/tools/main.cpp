// fixpoint — experiment runner for the fixed-point iteration laboratory.
//
// Loads scenario files, validates everything up front, executes each scenario
// (sequentially by default, concurrently with --parallel), writes per-scenario
// artifacts plus a summary CSV, and prints one line per scenario.
//
// Exit codes: 0 success, 2 configuration/validation error, 3 numeric-range
// error, 4 violation found by a certification scenario.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fixpoint/fixpoint.hpp"

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("FIXPOINT_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0') {
    throw fixpoint::ConfigurationError("FIXPOINT_SEED: not a nonnegative integer");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fixpoint: fixed-point iteration laboratory"};
  std::vector<std::string> scenario_files;
  std::string only_name;
  std::string summary_path = "summary.csv";
  std::optional<long> max_iters;
  std::optional<double> tol;
  std::optional<long> seed_flag;
  bool parallel = false;

  app.add_option("--scenario", scenario_files, "Scenario file(s) to load")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--only", only_name, "Run only the scenario with this name");
  app.add_option("--max-iters", max_iters, "Override max_iters / N of every scenario");
  app.add_option("--tol", tol, "Override the residual tolerance of iterate scenarios");
  app.add_option("--seed", seed_flag, "Override every scenario seed")->check(CLI::NonNegativeNumber);
  app.add_flag("--parallel", parallel, "Execute independent scenarios concurrently");
  app.add_option("--summary", summary_path, "Summary CSV path (default: summary.csv)");
  CLI11_PARSE(app, argc, argv);

  std::vector<fixpoint::Scenario> scenarios;
  fixpoint::ScenarioOverrides overrides;
  try {
    for (const std::string& file : scenario_files) {
      std::vector<fixpoint::Scenario> loaded = fixpoint::load_scenarios(file);
      for (fixpoint::Scenario& s : loaded) scenarios.push_back(std::move(s));
    }
    if (!only_name.empty()) {
      std::vector<fixpoint::Scenario> filtered;
      for (fixpoint::Scenario& s : scenarios) {
        if (s.name == only_name) filtered.push_back(std::move(s));
      }
      if (filtered.empty()) {
        throw fixpoint::ConfigurationError("--only: no scenario named '" + only_name + "'");
      }
      scenarios = std::move(filtered);
    }
    std::set<std::string> outputs;
    for (const fixpoint::Scenario& s : scenarios) {
      if (!outputs.insert(s.output_path.string()).second) {
        throw fixpoint::ConfigurationError("duplicate output path " + s.output_path.string());
      }
    }
    overrides.max_iters = max_iters;
    overrides.residual_tol = tol;
    if (seed_flag.has_value()) overrides.seed = static_cast<std::uint64_t>(*seed_flag);
    overrides.env_seed = env_seed();
  } catch (const fixpoint::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  std::vector<fixpoint::ExecutionResult> results(scenarios.size());
  if (parallel) {
    std::vector<std::future<fixpoint::ExecutionResult>> futures;
    futures.reserve(scenarios.size());
    for (const fixpoint::Scenario& s : scenarios) {
      futures.push_back(std::async(std::launch::async,
                                   [&s, &overrides]() { return fixpoint::execute(s, overrides); }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) results[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      results[i] = fixpoint::execute(scenarios[i], overrides);
    }
  }

  int exit_code = 0;
  for (const fixpoint::ExecutionResult& r : results) {
    std::cout << r.summary_line() << '\n';
    if (exit_code == 0 && r.exit_code != 0) exit_code = r.exit_code;
  }

  std::filesystem::path summary{summary_path};
  if (summary.has_parent_path()) std::filesystem::create_directories(summary.parent_path());
  std::ofstream out(summary, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << summary_path << '\n';
    return 2;
  }
  fixpoint::write_summary_csv(out, results);
  return exit_code;
}
