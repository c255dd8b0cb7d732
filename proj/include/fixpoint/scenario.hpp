#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fixpoint/analysis.hpp"
#include "fixpoint/errors.hpp"
#include "fixpoint/iteration.hpp"
#include "fixpoint/mappings.hpp"
#include "fixpoint/trace_io.hpp"

namespace fixpoint {

inline constexpr std::uint64_t kDefaultSeed = 0;

enum class ScenarioKind { Iterate, Certify, LemmaAudit, Counterexample };

inline std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Iterate:
      return "iterate";
    case ScenarioKind::Certify:
      return "certify";
    case ScenarioKind::LemmaAudit:
      return "lemma-audit";
    case ScenarioKind::Counterexample:
      return "counterexample";
  }
  return "?";
}

struct CertifyPayload {
  MappingSpec map;
  ParameterSequences params;
  long n_max = 1;
  long samples = 1000;
  std::optional<DomainSpec> region;
};

struct LemmaAuditPayload {
  double a1 = 0.0;
  SequenceRule alpha = SequenceRule::zero();
  SequenceRule b = SequenceRule::zero();
  long n_max = 1;
};

/// One named experiment: an iteration run, a mapping certification, a
/// sequence-envelope audit, or the divergence demo. The payload is fully
/// validated at load time; nothing executes from a file with any invalid
/// scenario.
struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::Iterate;
  std::optional<std::uint64_t> seed;  // file value; resolution order: flag > file > env > default
  std::filesystem::path output_path;  // CSV artifact; a .json sibling is written next to it

  std::optional<IterationConfig> iterate;
  std::optional<CertifyPayload> certify;
  std::optional<LemmaAuditPayload> lemma;
  std::optional<long> counterexample_n;

  std::uint64_t effective_seed(std::optional<std::uint64_t> flag_override,
                               std::optional<std::uint64_t> env_default) const {
    if (flag_override.has_value()) return *flag_override;
    if (seed.has_value()) return *seed;
    if (env_default.has_value()) return *env_default;
    return kDefaultSeed;
  }
};

// --------------------------------------------------------------------------
// JSON loading with document-path error reporting
// --------------------------------------------------------------------------

namespace detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& why) {
  throw ConfigurationError(path + ": " + why);
}

inline const json& member(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing required field");
  return *it;
}

inline const json* member_opt(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline long as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<double> as_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

/// Runs a payload builder, rewriting library validation errors with the
/// document path of the offending section.
template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigurationError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigurationError(path + ": " + e.what());
  }
}

inline DomainSpec parse_domain(const json& j, const std::string& path) {
  const std::string kind = as_string(member(j, path, "kind"), path + ".kind");
  return with_path(path, [&]() {
    if (kind == "box") {
      return DomainSpec::box(as_vector(member(j, path, "lo"), path + ".lo"),
                             as_vector(member(j, path, "hi"), path + ".hi"));
    }
    if (kind == "ball") {
      return DomainSpec::ball(
          Point(as_vector(member(j, path, "center"), path + ".center")),
          as_number(member(j, path, "radius"), path + ".radius"));
    }
    if (kind == "halfline") {
      return DomainSpec::halfline(as_number(member(j, path, "lo"), path + ".lo"));
    }
    fail(path + ".kind", "unknown domain kind '" + kind + "'");
  });
}

inline SequenceRule parse_rule(const json* j, const std::string& path) {
  if (j == nullptr) return SequenceRule::zero();
  const std::string kind = as_string(member(*j, path, "kind"), path + ".kind");
  return with_path(path, [&]() {
    if (kind == "zero") return SequenceRule::zero();
    if (kind == "inverse-square") {
      return SequenceRule::inverse_square(as_number(member(*j, path, "c"), path + ".c"));
    }
    if (kind == "geometric") {
      return SequenceRule::geometric(as_number(member(*j, path, "c"), path + ".c"),
                                     as_number(member(*j, path, "q"), path + ".q"));
    }
    if (kind == "finite") {
      return SequenceRule::finite(as_vector(member(*j, path, "values"), path + ".values"));
    }
    if (kind == "harmonic") {
      return SequenceRule::harmonic(as_number(member(*j, path, "c"), path + ".c"));
    }
    fail(path + ".kind", "unknown rule kind '" + kind + "'");
  });
}

inline PhiSpec parse_phi(const json* j, const std::string& path) {
  if (j == nullptr) return PhiSpec::identity();
  const std::string kind = as_string(member(*j, path, "kind"), path + ".kind");
  const double m = as_number(member(*j, path, "M"), path + ".M");
  const double m_star = as_number(member(*j, path, "M_star"), path + ".M_star");
  return with_path(path, [&]() {
    if (kind == "identity") return PhiSpec::identity(m, m_star);
    if (kind == "power") {
      return PhiSpec::power(as_number(member(*j, path, "exponent"), path + ".exponent"), m,
                            m_star);
    }
    if (kind == "table") {
      const json& knots = member(*j, path, "knots");
      if (!knots.is_array()) fail(path + ".knots", "expected an array of [t, value] pairs");
      std::vector<std::pair<double, double>> pairs;
      for (std::size_t i = 0; i < knots.size(); ++i) {
        const std::string kp = path + ".knots[" + std::to_string(i) + "]";
        std::vector<double> kv = as_vector(knots[i], kp);
        if (kv.size() != 2) fail(kp, "expected a [t, value] pair");
        pairs.emplace_back(kv[0], kv[1]);
      }
      return PhiSpec::table(std::move(pairs), m, m_star);
    }
    fail(path + ".kind", "unknown phi kind '" + kind + "'");
  });
}

inline ParameterSequences parse_params(const json* j, const std::string& path) {
  ParameterSequences params;
  if (j == nullptr) return params;
  params.mu = parse_rule(member_opt(*j, path, "mu"), path + ".mu");
  params.ell = parse_rule(member_opt(*j, path, "ell"), path + ".ell");
  params.a = parse_rule(member_opt(*j, path, "a"), path + ".a");
  params.phi = parse_phi(member_opt(*j, path, "phi"), path + ".phi");
  with_path(path, [&]() { params.validate(); return 0; });
  return params;
}

inline std::vector<Point> parse_points(const json* j, const std::string& path) {
  std::vector<Point> pts;
  if (j == nullptr) return pts;
  if (!j->is_array()) fail(path, "expected an array of points");
  for (std::size_t i = 0; i < j->size(); ++i) {
    const std::string pp = path + "[" + std::to_string(i) + "]";
    with_path(pp, [&]() { pts.push_back(Point(as_vector((*j)[i], pp))); return 0; });
  }
  return pts;
}

inline MappingSpec parse_map(const json& j, const std::string& path, const DomainSpec& domain) {
  const std::string kind = as_string(member(j, path, "kind"), path + ".kind");
  std::vector<Point> fixed = parse_points(member_opt(j, path, "fixed_points"),
                                          path + ".fixed_points");
  return with_path(path, [&]() {
    if (kind == "affine") {
      const json& rows = member(j, path, "matrix");
      if (!rows.is_array() || rows.empty()) fail(path + ".matrix", "expected an array of rows");
      const std::size_t d = rows.size();
      Matrix mat{d, std::vector<double>(d * d, 0.0)};
      for (std::size_t r = 0; r < d; ++r) {
        const std::string rp = path + ".matrix[" + std::to_string(r) + "]";
        std::vector<double> row = as_vector(rows[r], rp);
        if (row.size() != d) fail(rp, "matrix must be square");
        for (std::size_t c = 0; c < d; ++c) mat.at(r, c) = row[c];
      }
      return MappingSpec::affine(std::move(mat),
                                 as_vector(member(j, path, "offset"), path + ".offset"), domain,
                                 std::move(fixed));
    }
    if (kind == "scale") {
      return MappingSpec::scale(as_number(member(j, path, "factor"), path + ".factor"), domain,
                                std::move(fixed));
    }
    if (kind == "identity") return MappingSpec::identity(domain);
    if (kind == "sahu-step") return MappingSpec::sahu_step();
    if (kind == "constant") {
      return MappingSpec::constant(Point(as_vector(member(j, path, "value"), path + ".value")),
                                   domain);
    }
    if (kind == "composed") {
      const json& parts = member(j, path, "stages");
      if (!parts.is_array() || parts.empty()) fail(path + ".stages", "expected mapping stages");
      std::vector<MappingSpec> stages;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        stages.push_back(parse_map(parts[i], path + ".stages[" + std::to_string(i) + "]", domain));
      }
      return MappingSpec::composed(std::move(stages), domain, std::move(fixed));
    }
    fail(path + ".kind", "unknown mapping kind '" + kind + "'");
  });
}

inline WeightSchedule parse_weights(const json* j, const std::string& path,
                                    std::size_t family_size) {
  if (j == nullptr) return WeightSchedule::uniform(family_size);
  const std::string kind = as_string(member(*j, path, "kind"), path + ".kind");
  double gamma1 = kDefaultGamma1, gamma2 = kDefaultGamma2;
  if (const json* g = member_opt(*j, path, "gamma1")) gamma1 = as_number(*g, path + ".gamma1");
  if (const json* g = member_opt(*j, path, "gamma2")) gamma2 = as_number(*g, path + ".gamma2");
  return with_path(path, [&]() {
    if (kind == "uniform") return WeightSchedule::uniform(family_size, gamma1, gamma2);
    if (kind == "constant") {
      return WeightSchedule::constant(as_vector(member(*j, path, "alphas"), path + ".alphas"),
                                      gamma1, gamma2);
    }
    if (kind == "alternating") {
      return WeightSchedule::alternating(as_vector(member(*j, path, "base"), path + ".base"),
                                         as_number(member(*j, path, "amplitude"),
                                                   path + ".amplitude"),
                                         gamma1, gamma2);
    }
    fail(path + ".kind", "unknown weight kind '" + kind + "'");
  });
}

inline IterationConfig parse_iterate(const json& j, const std::string& path) {
  DomainSpec domain = parse_domain(member(j, path, "domain"), path + ".domain");
  const json& family = member(j, path, "family");
  if (!family.is_array() || family.empty()) fail(path + ".family", "expected family members");
  IterationConfig config;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const std::string fp = path + ".family[" + std::to_string(i) + "]";
    MappingSpec map = parse_map(member(family[i], fp, "map"), fp + ".map", domain);
    ParameterSequences params = parse_params(member_opt(family[i], fp, "params"), fp + ".params");
    config.family.push_back(FamilyMember{std::move(map), std::move(params)});
  }
  config.weights = parse_weights(member_opt(j, path, "weights"), path + ".weights",
                                 config.family.size());
  config.x1 = with_path(path + ".x1",
                        [&]() { return Point(as_vector(member(j, path, "x1"), path + ".x1")); });
  if (const json* mi = member_opt(j, path, "max_iters")) {
    config.max_iters = as_integer(*mi, path + ".max_iters");
  }
  if (const json* rt = member_opt(j, path, "residual_tol")) {
    config.residual_tol = as_number(*rt, path + ".residual_tol");
  }
  if (const json* rp = member_opt(j, path, "reference_point")) {
    config.reference_point = with_path(path + ".reference_point", [&]() {
      return Point(as_vector(*rp, path + ".reference_point"));
    });
  }
  with_path(path, [&]() { config.validate(); return 0; });
  return config;
}

inline CertifyPayload parse_certify(const json& j, const std::string& path) {
  DomainSpec domain = parse_domain(member(j, path, "domain"), path + ".domain");
  CertifyPayload payload{parse_map(member(j, path, "map"), path + ".map", domain),
                         parse_params(member_opt(j, path, "params"), path + ".params"),
                         1, 1000, std::nullopt};
  payload.n_max = as_integer(member(j, path, "n_max"), path + ".n_max");
  payload.samples = as_integer(member(j, path, "samples"), path + ".samples");
  if (payload.n_max < 1) fail(path + ".n_max", "must be >= 1");
  if (payload.samples < 2) fail(path + ".samples", "must be >= 2");
  if (const json* r = member_opt(j, path, "region")) {
    payload.region = parse_domain(*r, path + ".region");
  }
  with_path(path, [&]() { validate_mapping(payload.map); return 0; });
  if (!payload.region.has_value() && !payload.map.domain().bounded()) {
    fail(path, "unbounded domain: a bounded sampling 'region' is required");
  }
  return payload;
}

inline LemmaAuditPayload parse_lemma(const json& j, const std::string& path) {
  LemmaAuditPayload payload;
  payload.a1 = as_number(member(j, path, "a1"), path + ".a1");
  payload.alpha = parse_rule(&member(j, path, "alpha"), path + ".alpha");
  payload.b = parse_rule(&member(j, path, "b"), path + ".b");
  payload.n_max = as_integer(member(j, path, "N"), path + ".N");
  // Dry-run a short prefix so rule problems surface at load time.
  with_path(path, [&]() { sequence_bound(payload.a1, payload.alpha, payload.b, 1); return 0; });
  if (payload.n_max < 1) fail(path + ".N", "must be >= 1");
  return payload;
}

}  // namespace detail

/// Loads and fully validates a scenario file. The format is JSON:
/// {"scenarios": [{name, kind, seed?, output, <kind payload>}, ...]}.
/// An empty file yields an empty list. Any invalid field aborts the whole
/// load with its document path, so nothing executes partially.
inline std::vector<Scenario> load_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("load_scenarios: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return {};

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }

  const nlohmann::json& list = detail::member(doc, path.string(), "scenarios");
  if (!list.is_array()) detail::fail(path.string() + ".scenarios", "expected an array");
  std::vector<Scenario> scenarios;
  std::set<std::string> names;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string sp = "scenarios[" + std::to_string(i) + "]";
    const nlohmann::json& js = list[i];
    Scenario s;
    s.name = detail::as_string(detail::member(js, sp, "name"), sp + ".name");
    if (!names.insert(s.name).second) {
      detail::fail(sp + ".name", "duplicate scenario name '" + s.name + "'");
    }
    const std::string kind = detail::as_string(detail::member(js, sp, "kind"), sp + ".kind");
    if (const nlohmann::json* seed = detail::member_opt(js, sp, "seed")) {
      long v = detail::as_integer(*seed, sp + ".seed");
      if (v < 0) detail::fail(sp + ".seed", "must be nonnegative");
      s.seed = static_cast<std::uint64_t>(v);
    }
    s.output_path = detail::as_string(detail::member(js, sp, "output"), sp + ".output");
    if (kind == "iterate") {
      s.kind = ScenarioKind::Iterate;
      s.iterate = detail::parse_iterate(detail::member(js, sp, "iterate"), sp + ".iterate");
    } else if (kind == "certify") {
      s.kind = ScenarioKind::Certify;
      s.certify = detail::parse_certify(detail::member(js, sp, "certify"), sp + ".certify");
    } else if (kind == "lemma-audit") {
      s.kind = ScenarioKind::LemmaAudit;
      s.lemma = detail::parse_lemma(detail::member(js, sp, "lemma-audit"), sp + ".lemma-audit");
    } else if (kind == "counterexample") {
      s.kind = ScenarioKind::Counterexample;
      const nlohmann::json& payload = detail::member(js, sp, "counterexample");
      s.counterexample_n = detail::as_integer(detail::member(payload, sp + ".counterexample", "N"),
                                              sp + ".counterexample.N");
      if (*s.counterexample_n < 1) detail::fail(sp + ".counterexample.N", "must be >= 1");
    } else {
      detail::fail(sp + ".kind", "unknown scenario kind '" + kind + "'");
    }
    scenarios.push_back(std::move(s));
  }
  return scenarios;
}

// --------------------------------------------------------------------------
// Execution
// --------------------------------------------------------------------------

/// Flag-level overrides; precedence is flag > file > default.
struct ScenarioOverrides {
  std::optional<long> max_iters;
  std::optional<double> residual_tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> env_seed;  // FIXPOINT_SEED fallback
};

struct ExecutionResult {
  std::string name;
  ScenarioKind kind = ScenarioKind::Iterate;
  int exit_code = 0;  // 0 ok, 2 config/validation, 3 numeric range, 4 violation found
  std::string stop_condition;
  std::string metric_name;
  double metric_value = 0.0;
  double wall_ms = 0.0;
  std::string message;

  std::string summary_line() const {
    std::ostringstream os;
    os << '[' << name << "] kind=" << to_string(kind)
       << " status=" << (exit_code == 0 ? "ok" : "exit-" + std::to_string(exit_code))
       << " stop=" << stop_condition << ' ' << metric_name << '=' << format_g17(metric_value)
       << " wall_ms=" << wall_ms;
    if (!message.empty()) os << " note=" << message;
    return os.str();
  }
};

namespace detail {

inline void write_artifacts(const std::filesystem::path& csv_path, const std::string& csv_text,
                            const nlohmann::json& doc) {
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw ConfigurationError("execute: cannot write " + csv_path.string());
    out << csv_text;
  }
  std::filesystem::path json_path = csv_path;
  json_path.replace_extension(".json");
  std::ofstream out(json_path, std::ios::binary);
  if (!out) throw ConfigurationError("execute: cannot write " + json_path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace detail

/// Runs one scenario and writes its artifacts (a CSV plus a JSON sibling).
/// Violations found by certification map to exit code 4; validation and
/// numeric-range failures to 2 and 3. Output files carry no timing, so reruns
/// with the same seed are byte-identical.
inline ExecutionResult execute(const Scenario& s, const ScenarioOverrides& overrides = {}) {
  ExecutionResult result;
  result.name = s.name;
  result.kind = s.kind;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const std::uint64_t seed = s.effective_seed(overrides.seed, overrides.env_seed);
    switch (s.kind) {
      case ScenarioKind::Iterate: {
        IterationConfig config = *s.iterate;
        if (overrides.max_iters.has_value()) config.max_iters = *overrides.max_iters;
        if (overrides.residual_tol.has_value()) config.residual_tol = *overrides.residual_tol;
        IterationTrace trace = run(config);
        std::ostringstream csv;
        write_trace_csv(csv, trace);
        nlohmann::json doc = to_json(trace);
        doc["scenario"] = s.name;
        if (config.reference_point.has_value()) {
          doc["fejer"] = to_json(check_fejer_bound(trace, config));
        }
        detail::write_artifacts(s.output_path, csv.str(), doc);
        result.stop_condition = std::string(to_string(trace.stop_reason));
        result.metric_name = "final_max_residual";
        result.metric_value = trace.final_max_residual();
        break;
      }
      case ScenarioKind::Certify: {
        const CertifyPayload& payload = *s.certify;
        CertifyReport report = certify_mapping(payload.map, payload.params, payload.n_max,
                                               payload.samples, seed, payload.region);
        std::ostringstream csv;
        write_certify_csv(csv, report);
        nlohmann::json doc = to_json(report);
        doc["scenario"] = s.name;
        doc["seed"] = seed;
        detail::write_artifacts(s.output_path, csv.str(), doc);
        double worst = 0.0;
        for (const InequalityCheck& c : report.inequality.per_n) {
          worst = std::min(worst, c.worst_margin);
        }
        result.stop_condition = report.passed() ? "no-violations" : "violation-found";
        result.metric_name = "worst_margin";
        result.metric_value = worst;
        if (!report.passed()) result.exit_code = 4;
        break;
      }
      case ScenarioKind::LemmaAudit: {
        const LemmaAuditPayload& payload = *s.lemma;
        long n_max = overrides.max_iters.value_or(payload.n_max);
        SequenceEnvelope env = sequence_bound(payload.a1, payload.alpha, payload.b, n_max);
        std::ostringstream csv;
        write_envelope_csv(csv, env);
        nlohmann::json doc = to_json(env);
        doc["scenario"] = s.name;
        detail::write_artifacts(s.output_path, csv.str(), doc);
        result.stop_condition = env.stabilized_at.has_value() ? "stabilized" : "completed";
        result.metric_name = "final_value";
        result.metric_value = env.values.back();
        break;
      }
      case ScenarioKind::Counterexample: {
        long n_max = overrides.max_iters.value_or(*s.counterexample_n);
        std::vector<CounterexampleRow> rows = counterexample_demo(n_max);
        std::ostringstream csv;
        write_counterexample_csv(csv, rows);
        nlohmann::json doc = to_json(rows);
        doc["scenario"] = s.name;
        detail::write_artifacts(s.output_path, csv.str(), doc);
        result.stop_condition = "completed";
        result.metric_name = "final_image_diff_log10";
        result.metric_value = rows.back().image_diff_log10;
        break;
      }
    }
  } catch (const NumericRangeError& e) {
    result.exit_code = 3;
    result.stop_condition = "numeric-range-error";
    result.message = e.what();
  } catch (const ValidationError& e) {
    result.exit_code = 2;
    result.stop_condition = "validation-error";
    result.message = e.what();
  }
  const auto t1 = std::chrono::steady_clock::now();
  result.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return result;
}

/// One row per executed scenario. wall_ms is the only field that varies
/// between identical runs.
inline void write_summary_csv(std::ostream& os, const std::vector<ExecutionResult>& results) {
  os << "name,kind,exit,stop_condition,metric,value,wall_ms\n";
  for (const ExecutionResult& r : results) {
    os << r.name << ',' << to_string(r.kind) << ',' << r.exit_code << ',' << r.stop_condition
       << ',' << r.metric_name << ',' << format_g17(r.metric_value) << ',' << r.wall_ms << '\n';
  }
}

}  // namespace fixpoint
