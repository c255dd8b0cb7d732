#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <catch_amalgamated.hpp>

#include "fixpoint/scenario.hpp"
#include "fixpoint/trace_io.hpp"

using namespace fixpoint;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarioDir = FIXPOINT_SCENARIO_DIR;
const fs::path kOutDir = fs::path(FIXPOINT_TEST_OUT) / "scenario";

fs::path write_temp(const std::string& name, const std::string& contents) {
  fs::create_directories(kOutDir);
  fs::path p = kOutDir / name;
  std::ofstream out(p, std::ios::binary);
  out << contents;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario redirect(Scenario s, const std::string& tag) {
  s.output_path = kOutDir / tag / s.output_path;
  return s;
}

}  // namespace

TEST_CASE("load_scenarios reads the shipped two-map fixture", "[scenario]") {
  std::vector<Scenario> list = load_scenarios(kScenarioDir / "theorem35_two_maps.json");
  REQUIRE(list.size() == 1);
  const Scenario& s = list.front();
  CHECK(s.name == "theorem35_two_maps");
  CHECK(s.kind == ScenarioKind::Iterate);
  REQUIRE(s.iterate.has_value());
  CHECK(s.iterate->family_size() == 2);
  CHECK(s.iterate->reference_point.has_value());
  CHECK(s.seed.has_value());
}

TEST_CASE("load_scenarios accepts an empty file", "[scenario]") {
  fs::path p = write_temp("empty.json", "  \n");
  CHECK(load_scenarios(p).empty());
}

TEST_CASE("load_scenarios reports gamma ordering with its path", "[scenario]") {
  fs::path p = write_temp("bad_gamma.json", R"({
    "scenarios": [{
      "name": "bad", "kind": "iterate", "output": "x.csv",
      "iterate": {
        "domain": {"kind": "box", "lo": [0.0], "hi": [1.0]},
        "x1": [0.5],
        "weights": {"kind": "uniform", "gamma1": 0.9, "gamma2": 0.1},
        "family": [{"map": {"kind": "identity"}}]
      }
    }]
  })");
  try {
    load_scenarios(p);
    FAIL("expected a ConfigurationError");
  } catch (const ConfigurationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("gamma") != std::string::npos);
    CHECK(msg.find("scenarios[0]") != std::string::npos);
  }
}

TEST_CASE("load_scenarios reports parse errors with line information", "[scenario]") {
  fs::path p = write_temp("broken.json", "{\n  \"scenarios\": oops\n}");
  try {
    load_scenarios(p);
    FAIL("expected a ConfigurationError");
  } catch (const ConfigurationError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("load_scenarios names missing fields and duplicates", "[scenario]") {
  fs::path missing = write_temp("missing_output.json", R"({
    "scenarios": [{"name": "a", "kind": "counterexample", "counterexample": {"N": 3}}]
  })");
  try {
    load_scenarios(missing);
    FAIL("expected a ConfigurationError");
  } catch (const ConfigurationError& e) {
    CHECK(std::string(e.what()).find("scenarios[0].output") != std::string::npos);
  }

  fs::path dup = write_temp("dup.json", R"({
    "scenarios": [
      {"name": "a", "kind": "counterexample", "output": "a.csv", "counterexample": {"N": 3}},
      {"name": "a", "kind": "counterexample", "output": "b.csv", "counterexample": {"N": 3}}
    ]
  })");
  CHECK_THROWS_AS(load_scenarios(dup), ConfigurationError);
}

TEST_CASE("execute writes the counterexample table", "[scenario]") {
  std::vector<Scenario> list = load_scenarios(kScenarioDir / "counterexample_remark.json");
  REQUIRE(list.size() == 1);
  Scenario s = redirect(list.front(), "ce");
  ExecutionResult result = execute(s);
  CHECK(result.exit_code == 0);
  CHECK(result.stop_condition == "completed");

  std::string csv = slurp(s.output_path);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "n,step_diff,image_diff_log10");
  int rows = 0;
  double log10_at_17 = 0.0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.rfind("17,", 0) == 0) {
      log10_at_17 = std::strtod(line.substr(line.rfind(',') + 1).c_str(), nullptr);
    }
  }
  CHECK(rows == 20);
  CHECK(log10_at_17 > 6.0);

  fs::path json_path = s.output_path;
  json_path.replace_extension(".json");
  CHECK(fs::exists(json_path));
}

TEST_CASE("execute maps certification violations to exit 4", "[scenario]") {
  std::vector<Scenario> list = load_scenarios(kScenarioDir / "certify_sahu_total.json");
  REQUIRE(list.size() == 2);

  Scenario good = redirect(list[0], "certify_ok");
  ExecutionResult ok = execute(good);
  CHECK(ok.exit_code == 0);
  CHECK(ok.stop_condition == "no-violations");

  Scenario bad = redirect(list[1], "certify_bad");
  ExecutionResult violated = execute(bad);
  CHECK(violated.exit_code == 4);
  CHECK(violated.stop_condition == "violation-found");
  CHECK(violated.metric_value < 0.0);
}

TEST_CASE("execute honors overrides", "[scenario]") {
  std::vector<Scenario> list = load_scenarios(kScenarioDir / "counterexample_remark.json");
  Scenario s = redirect(list.front(), "ce_override");
  ScenarioOverrides overrides;
  overrides.max_iters = 5;
  ExecutionResult result = execute(s, overrides);
  CHECK(result.exit_code == 0);
  std::string csv = slurp(s.output_path);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header + 5 rows
}

TEST_CASE("re-execution with the same seed is byte-identical", "[scenario]") {
  for (const char* file :
       {"theorem36_sahu_identity.json", "certify_sahu_total.json", "lemma21_audit.json"}) {
    std::vector<Scenario> list = load_scenarios(kScenarioDir / file);
    for (const Scenario& base : list) {
      Scenario first = redirect(base, "rerun_a");
      Scenario second = redirect(base, "rerun_b");
      execute(first);
      execute(second);
      CHECK(slurp(first.output_path) == slurp(second.output_path));
      fs::path ja = first.output_path, jb = second.output_path;
      ja.replace_extension(".json");
      jb.replace_extension(".json");
      CHECK(slurp(ja) == slurp(jb));
    }
  }
}

TEST_CASE("trace CSV round-trips to the last digit", "[scenario]") {
  std::vector<Scenario> list = load_scenarios(kScenarioDir / "theorem36_sahu_identity.json");
  REQUIRE(list.size() == 1);
  IterationTrace trace = run(*list.front().iterate);
  std::ostringstream os;
  write_trace_csv(os, trace);
  std::istringstream is(os.str());
  IterationTrace parsed = read_trace_csv(is);
  REQUIRE(parsed.steps.size() == trace.steps.size());
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    CHECK(parsed.steps[i].n == trace.steps[i].n);
    CHECK(parsed.steps[i].x == trace.steps[i].x);
    CHECK(parsed.steps[i].residuals == trace.steps[i].residuals);
    CHECK(parsed.steps[i].step_diff == trace.steps[i].step_diff);
    CHECK(parsed.steps[i].dist_to_p == trace.steps[i].dist_to_p);
  }
}

TEST_CASE("summary CSV has one row per executed scenario", "[scenario]") {
  std::vector<Scenario> list = load_scenarios(kScenarioDir / "counterexample_remark.json");
  Scenario s = redirect(list.front(), "summary");
  std::vector<ExecutionResult> results{execute(s)};
  std::ostringstream os;
  write_summary_csv(os, results);
  std::string text = os.str();
  CHECK(text.find("name,kind,exit,stop_condition,metric,value,wall_ms") == 0);
  CHECK(text.find("counterexample_remark,counterexample,0,completed,") != std::string::npos);
}

TEST_CASE("the CLI supports --parallel, --only and the env seed", "[scenario]") {
  const std::string cli = FIXPOINT_CLI_PATH;
  auto shell = [](const std::string& cmd) { return std::system(cmd.c_str()); };
  auto run_in = [&](const std::string& tag, const std::string& flags,
                    const std::string& env = "") {
    fs::path dir = kOutDir / tag;
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string cmd = "cd " + dir.string() + " && " + env + " " + cli + " --scenario " +
                      (kScenarioDir / "theorem36_sahu_identity.json").string() + " --scenario " +
                      (kScenarioDir / "lemma21_audit.json").string() + " " + flags +
                      " > stdout.txt 2>&1";
    shell(cmd);
    return dir;
  };

  fs::path seq = run_in("cli_seq", "");
  fs::path par = run_in("cli_par", "--parallel");
  for (const char* rel :
       {"out/theorem36_sahu_identity.csv", "out/theorem36_sahu_identity.json",
        "out/lemma21_audit.csv", "out/lemma21_audit.json"}) {
    CHECK(slurp(seq / rel) == slurp(par / rel));
  }

  fs::path only = run_in("cli_only", "--only lemma21_audit");
  CHECK(fs::exists(only / "out/lemma21_audit.csv"));
  CHECK_FALSE(fs::exists(only / "out/theorem36_sahu_identity.csv"));

  // a seedless certify scenario picks up FIXPOINT_SEED; same env seed, same
  // bytes; different env seed, different sampled artifacts
  write_temp("seedless.json", R"({
    "scenarios": [{
      "name": "seedless", "kind": "certify", "output": "out/seedless.csv",
      "certify": {
        "domain": {"kind": "box", "lo": [0.0], "hi": [1.0]},
        "map": {"kind": "sahu-step"},
        "params": {"ell": {"kind": "geometric", "c": 1.0, "q": 0.5},
                    "a": {"kind": "geometric", "c": 1.0, "q": 0.5}},
        "n_max": 2, "samples": 200
      }
    }]
  })");
  auto run_seedless = [&](const std::string& tag, const std::string& env) {
    fs::path dir = kOutDir / tag;
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string cmd = "cd " + dir.string() + " && " + env + " " + cli + " --scenario " +
                      (kOutDir / "seedless.json").string() + " > stdout.txt 2>&1";
    shell(cmd);
    return slurp(dir / "out/seedless.json");
  };
  std::string a = run_seedless("env_a", "FIXPOINT_SEED=11");
  std::string b = run_seedless("env_b", "FIXPOINT_SEED=11");
  std::string c = run_seedless("env_c", "FIXPOINT_SEED=12");
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("effective seed resolution follows flag > file > env > default", "[scenario]") {
  Scenario s;
  s.seed = 42;
  CHECK(s.effective_seed(std::nullopt, std::nullopt) == 42);
  CHECK(s.effective_seed(7, std::nullopt) == 7);
  CHECK(s.effective_seed(std::nullopt, 9) == 42);
  s.seed.reset();
  CHECK(s.effective_seed(std::nullopt, 9) == 9);
  CHECK(s.effective_seed(std::nullopt, std::nullopt) == kDefaultSeed);
}
