#pragma once

#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fixpoint/analysis.hpp"
#include "fixpoint/errors.hpp"
#include "fixpoint/iteration.hpp"
#include "fixpoint/numeric.hpp"

namespace fixpoint {

// All numeric CSV cells use 17 significant digits so parsing reproduces the
// in-memory doubles exactly.

// --------------------------------------------------------------------------
// Iteration traces
// --------------------------------------------------------------------------

/// Columns: n, coord_0..coord_{d-1}, residual_1..residual_m, step_diff,
/// dist_to_p. step_diff is empty on the final record, dist_to_p is empty when
/// no reference point was supplied.
inline void write_trace_csv(std::ostream& os, const IterationTrace& trace) {
  if (trace.steps.empty()) throw InvalidInputError("write_trace_csv: empty trace");
  const std::size_t d = trace.steps.front().x.dim();
  const std::size_t m = trace.steps.front().residuals.size();
  os << "n";
  for (std::size_t j = 0; j < d; ++j) os << ",coord_" << j;
  for (std::size_t i = 1; i <= m; ++i) os << ",residual_" << i;
  os << ",step_diff,dist_to_p\n";
  for (const StepRecord& rec : trace.steps) {
    os << rec.n;
    for (std::size_t j = 0; j < d; ++j) os << ',' << format_g17(rec.x[j]);
    for (double r : rec.residuals) os << ',' << format_g17(r);
    os << ',';
    if (rec.step_diff.has_value()) os << format_g17(*rec.step_diff);
    os << ',';
    if (rec.dist_to_p.has_value()) os << format_g17(*rec.dist_to_p);
    os << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

inline double parse_cell(const std::string& cell) {
  char* end = nullptr;
  double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    throw InvalidInputError("trace csv: unparseable number '" + cell + "'");
  }
  return v;
}

}  // namespace detail

/// Inverse of write_trace_csv for the CSV-visible fields. Fields not present
/// in the CSV schema (stop reason, envelope bound) are left defaulted.
inline IterationTrace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInputError("trace csv: missing header");
  std::vector<std::string> header = detail::split_csv_line(line);
  std::size_t d = 0, m = 0;
  for (const std::string& name : header) {
    if (name.rfind("coord_", 0) == 0) ++d;
    if (name.rfind("residual_", 0) == 0) ++m;
  }
  if (d == 0 || header.size() != 1 + d + m + 2) {
    throw InvalidInputError("trace csv: unexpected header layout");
  }
  IterationTrace trace;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) throw InvalidInputError("trace csv: ragged row");
    StepRecord rec;
    std::size_t col = 0;
    rec.n = static_cast<long>(detail::parse_cell(cells[col++]));
    std::vector<double> coords(d);
    for (std::size_t j = 0; j < d; ++j) coords[j] = detail::parse_cell(cells[col++]);
    rec.x = Point(std::move(coords));
    rec.residuals.resize(m);
    for (std::size_t i = 0; i < m; ++i) rec.residuals[i] = detail::parse_cell(cells[col++]);
    if (!cells[col].empty()) rec.step_diff = detail::parse_cell(cells[col]);
    ++col;
    if (!cells[col].empty()) rec.dist_to_p = detail::parse_cell(cells[col]);
    trace.steps.push_back(std::move(rec));
  }
  return trace;
}

inline nlohmann::json to_json(const IterationTrace& trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (const StepRecord& rec : trace.steps) {
    nlohmann::json j{{"n", rec.n}, {"x", rec.x.coords()}, {"residuals", rec.residuals}};
    j["step_diff"] = rec.step_diff.has_value() ? nlohmann::json(*rec.step_diff)
                                               : nlohmann::json(nullptr);
    j["dist_to_p"] = rec.dist_to_p.has_value() ? nlohmann::json(*rec.dist_to_p)
                                               : nlohmann::json(nullptr);
    j["theorem31_bound"] = rec.theorem31_bound.has_value()
                               ? nlohmann::json(*rec.theorem31_bound)
                               : nlohmann::json(nullptr);
    steps.push_back(std::move(j));
  }
  return nlohmann::json{{"stop_reason", std::string(to_string(trace.stop_reason))},
                        {"steps", std::move(steps)}};
}

inline nlohmann::json to_json(const FejerReport& report) {
  return nlohmann::json{{"checked_steps", report.checked_steps},
                        {"satisfied_steps", report.satisfied_steps},
                        {"worst_margin", report.worst_margin},
                        {"worst_step", report.worst_step},
                        {"slack", report.slack},
                        {"violation_steps", report.violation_steps}};
}

// --------------------------------------------------------------------------
// Sequence envelopes
// --------------------------------------------------------------------------

/// Columns: n, value, growth, offset — the envelope value a_n with its
/// running product and running sum (rows n = 1..N; the trailing a_{N+1} is in
/// the JSON document).
inline void write_envelope_csv(std::ostream& os, const SequenceEnvelope& env) {
  os << "n,value,growth,offset\n";
  for (std::size_t i = 0; i < env.growth.size(); ++i) {
    os << (i + 1) << ',' << format_g17(env.values[i]) << ',' << format_g17(env.growth[i]) << ','
       << format_g17(env.offsets[i]) << '\n';
  }
}

inline nlohmann::json to_json(const SequenceEnvelope& env) {
  nlohmann::json j{{"partial_bound", env.partial_bound},
                   {"series_bound", env.series_bound},
                   {"max_value", env.max_value},
                   {"bounded", env.bounded},
                   {"final_value", env.values.back()},
                   {"values", env.values}};
  j["stabilized_at"] = env.stabilized_at.has_value() ? nlohmann::json(*env.stabilized_at)
                                                     : nlohmann::json(nullptr);
  return j;
}

// --------------------------------------------------------------------------
// Certification reports
// --------------------------------------------------------------------------

namespace detail {

inline nlohmann::json witness_json(const std::optional<std::pair<Point, Point>>& w) {
  if (!w.has_value()) return nullptr;
  return nlohmann::json{{"x", w->first.coords()}, {"y", w->second.coords()}};
}

}  // namespace detail

/// Columns: n, worst_margin, violations, eta_hat, eta_skipped, defect_a_hat,
/// defect_sigma_hat.
inline void write_certify_csv(std::ostream& os, const CertifyReport& report) {
  os << "n,worst_margin,violations,eta_hat,eta_skipped,defect_a_hat,defect_sigma_hat\n";
  for (std::size_t i = 0; i < report.inequality.per_n.size(); ++i) {
    const InequalityCheck& c = report.inequality.per_n[i];
    os << c.n << ',' << format_g17(c.worst_margin) << ',' << c.violation_count << ','
       << format_g17(report.eta[i].eta_hat) << ',' << report.eta[i].skipped_pairs << ','
       << format_g17(report.defect[i].a_n_hat) << ',' << format_g17(report.defect[i].sigma_n_hat)
       << '\n';
  }
}

inline nlohmann::json to_json(const CertifyReport& report) {
  nlohmann::json per_n = nlohmann::json::array();
  for (std::size_t i = 0; i < report.inequality.per_n.size(); ++i) {
    const InequalityCheck& c = report.inequality.per_n[i];
    nlohmann::json j{{"n", c.n},
                     {"worst_margin", c.worst_margin},
                     {"violations", c.violation_count},
                     {"eta_hat", report.eta[i].eta_hat},
                     {"eta_a_n", report.eta[i].a_n},
                     {"eta_skipped_pairs", report.eta[i].skipped_pairs},
                     {"eta_witness", detail::witness_json(report.eta[i].witness)},
                     {"defect_a_hat", report.defect[i].a_n_hat},
                     {"defect_sigma_hat", report.defect[i].sigma_n_hat},
                     {"defect_witness", detail::witness_json(report.defect[i].witness)}};
    if (c.worst_pair.has_value()) {
      j["worst_pair"] = nlohmann::json{{"x", c.worst_pair->x.coords()},
                                       {"y", c.worst_pair->y.coords()},
                                       {"lhs", c.worst_pair->lhs},
                                       {"rhs", c.worst_pair->rhs}};
    } else {
      j["worst_pair"] = nullptr;
    }
    per_n.push_back(std::move(j));
  }
  return nlohmann::json{{"passed", report.passed()},
                        {"total_violations", report.inequality.total_violations()},
                        {"slack", report.inequality.slack},
                        {"point_count", report.inequality.point_count},
                        {"pair_count", report.inequality.pair_count},
                        {"per_n", std::move(per_n)}};
}

// --------------------------------------------------------------------------
// Divergence demo table
// --------------------------------------------------------------------------

/// Columns: n, step_diff, image_diff_log10.
inline void write_counterexample_csv(std::ostream& os,
                                     const std::vector<CounterexampleRow>& rows) {
  os << "n,step_diff,image_diff_log10\n";
  for (const CounterexampleRow& row : rows) {
    os << row.n << ',' << format_g17(row.step_diff) << ',' << format_g17(row.image_diff_log10)
       << '\n';
  }
}

inline nlohmann::json to_json(const std::vector<CounterexampleRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CounterexampleRow& row : rows) {
    arr.push_back(nlohmann::json{{"n", row.n},
                                 {"step_diff", row.step_diff},
                                 {"image_diff_log10", row.image_diff_log10}});
  }
  return nlohmann::json{{"rows", std::move(arr)}};
}

}  // namespace fixpoint
