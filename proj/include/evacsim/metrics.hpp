#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "evacsim/errors.hpp"

namespace evacsim {

/// Relative evacuation-time difference for one node (dimensionless).
inline double node_delta(double t_perturbed, double t_ideal) {
  if (!(t_ideal > 0.0)) throw ValidationError("node_delta requires positive ideal time");
  return (t_perturbed - t_ideal) / t_ideal;
}

/// Aggregate relative difference over many (perturbed, ideal) pairs,
/// in the sum-of-sums form — NOT the mean of per-pair ratios.
inline double average_delta(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw ValidationError("average_delta of empty input");
  double sum_perturbed = 0.0, sum_ideal = 0.0;
  for (const auto& [t_perturbed, t_ideal] : pairs) {
    sum_perturbed += t_perturbed;
    sum_ideal += t_ideal;
  }
  if (!(sum_ideal > 0.0)) throw ValidationError("average_delta requires positive ideal sum");
  return (sum_perturbed - sum_ideal) / sum_ideal;
}

/// One runs.csv row: a single evacuee in a single paired run.
struct ResultRow {
  long long run_id = 0;
  std::uint64_t seed = 0;  // per-run derived seed
  double pod = 0.0;
  int sod = 0;
  double poe = 0.0;
  int node_id = 0;
  double t_ideal_s = 0.0;
  double t_actual_s = 0.0;
  bool deadline_violated = false;
};

/// One aggregate.csv row: one (pod, sod, poe) grid point over all its runs.
struct AggregateMetric {
  double pod = 0.0;
  int sod = 0;
  double poe = 0.0;
  long long runs = 0;
  double delta_avg = 0.0;
  double fraction_positive = 0.0;  // share of nodes with mean per-run delta > 0
  double mean_arrival_s = 0.0;
  double violation_rate = 0.0;
};

namespace detail {

inline void append_fixed(std::string& out, double v, int decimals) {
  char buf[64];
  int n = std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  out.append(buf, buf + n);
}

// Shortest text that round-trips the double (for grid coordinates).
inline void append_shortest(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

inline double round_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  double parsed = 0.0;
  std::from_chars(buf, buf + std::char_traits<char>::length(buf), parsed);
  return parsed;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << body;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace detail

/// Emits runs.csv. Times carry 6 decimals and deltas 9; the delta column is
/// computed from the times exactly as printed, so parsing the file and
/// recomputing delta from its own columns reproduces the stored value.
/// Rows are sorted by (pod, sod, poe, run_id, node_id).
inline void write_results_csv(std::vector<ResultRow> rows, const std::string& path) {
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.pod, a.sod, a.poe, a.run_id, a.node_id) <
           std::tie(b.pod, b.sod, b.poe, b.run_id, b.node_id);
  });
  std::string out = "run_id,seed,pod,sod,poe,node_id,t_ideal_s,t_actual_s,delta,deadline_violated\n";
  for (const ResultRow& r : rows) {
    if (!(r.t_ideal_s > 0.0))
      throw ValidationError("results row requires positive ideal time (exit starts excluded)");
    out += std::to_string(r.run_id);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    detail::append_shortest(out, r.pod);
    out += ',';
    out += std::to_string(r.sod);
    out += ',';
    detail::append_shortest(out, r.poe);
    out += ',';
    out += std::to_string(r.node_id);
    out += ',';
    detail::append_fixed(out, r.t_ideal_s, 6);
    out += ',';
    detail::append_fixed(out, r.t_actual_s, 6);
    out += ',';
    double ideal6 = detail::round_fixed(r.t_ideal_s, 6);
    double actual6 = detail::round_fixed(r.t_actual_s, 6);
    detail::append_fixed(out, (actual6 - ideal6) / ideal6, 9);
    out += ',';
    out += r.deadline_violated ? '1' : '0';
    out += '\n';
  }
  detail::write_text_file(path, out);
}

/// Emits aggregate.csv, one row per grid point, sorted by (pod, sod, poe).
inline void write_aggregate_csv(std::vector<AggregateMetric> aggs, const std::string& path) {
  std::sort(aggs.begin(), aggs.end(), [](const AggregateMetric& a, const AggregateMetric& b) {
    return std::tie(a.pod, a.sod, a.poe) < std::tie(b.pod, b.sod, b.poe);
  });
  std::string out = "pod,sod,poe,runs,delta_avg,fraction_positive,mean_arrival_s,violation_rate\n";
  for (const AggregateMetric& a : aggs) {
    detail::append_shortest(out, a.pod);
    out += ',';
    out += std::to_string(a.sod);
    out += ',';
    detail::append_shortest(out, a.poe);
    out += ',';
    out += std::to_string(a.runs);
    out += ',';
    detail::append_fixed(out, a.delta_avg, 9);
    out += ',';
    detail::append_fixed(out, a.fraction_positive, 9);
    out += ',';
    detail::append_fixed(out, a.mean_arrival_s, 6);
    out += ',';
    detail::append_fixed(out, a.violation_rate, 9);
    out += '\n';
  }
  detail::write_text_file(path, out);
}

/// Folds the rows of one grid point into its aggregate line; violations are
/// read off the rows. All rows must belong to the given grid point.
inline AggregateMetric aggregate_rows(const std::vector<ResultRow>& rows, double pod, int sod,
                                      double poe) {
  AggregateMetric agg;
  agg.pod = pod;
  agg.sod = sod;
  agg.poe = poe;
  if (rows.empty()) throw ValidationError("aggregate of empty row set");
  double sum_ideal = 0.0, sum_actual = 0.0, sum_arrival = 0.0;
  long long violations = 0;
  std::map<int, std::pair<double, long long>> per_node;  // node -> (delta sum, count)
  std::map<long long, bool> run_ids;
  for (const ResultRow& r : rows) {
    sum_ideal += r.t_ideal_s;
    sum_actual += r.t_actual_s;
    sum_arrival += r.t_actual_s;
    violations += r.deadline_violated ? 1 : 0;
    auto& [delta_sum, count] = per_node[r.node_id];
    delta_sum += node_delta(r.t_actual_s, r.t_ideal_s);
    ++count;
    run_ids[r.run_id] = true;
  }
  agg.runs = static_cast<long long>(run_ids.size());
  agg.delta_avg = (sum_actual - sum_ideal) / sum_ideal;
  long long positive = 0;
  for (const auto& [node, acc] : per_node)
    if (acc.first / static_cast<double>(acc.second) > 0.0) ++positive;
  agg.fraction_positive = static_cast<double>(positive) / static_cast<double>(per_node.size());
  agg.mean_arrival_s = sum_arrival / static_cast<double>(rows.size());
  agg.violation_rate = static_cast<double>(violations) / static_cast<double>(rows.size());
  return agg;
}

}  // namespace evacsim
