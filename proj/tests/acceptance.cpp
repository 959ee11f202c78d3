// Acceptance suite: ten pinned criteria covering deadline arithmetic, the
// worst-case budget guarantee, oracle equivalence on exhaustively enumerated
// small graphs, the statistical shape of the delay/error studies on the
// 346-node synthetic topology, output reproducibility, and liveness.
//
// Every threshold, seed, and run count is pinned here on purpose: the suite
// must reproduce the same verdicts on every machine. One line per criterion.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "evacsim/experiment.hpp"
#include "evacsim/metrics.hpp"
#include "evacsim/nav_graph.hpp"
#include "evacsim/rng.hpp"
#include "evacsim/route_tables.hpp"
#include "evacsim/simulation.hpp"
#include "evacsim/traversal_field.hpp"

using namespace evacsim;

namespace {

constexpr std::uint64_t kGraphSeed = 13;    // 346-node topology with max W well under T_D
constexpr std::uint64_t kMasterSeed = 1001; // master seed for every statistical criterion
constexpr int kBootstrapSamples = 1000;     // percentile bootstrap, 95% two-sided

struct Criterion {
  bool pass = false;
  std::string detail;
};

template <typename F>
Criterion guarded(F&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

// --- shared statistical plumbing -------------------------------------------

struct RunSums {
  double ideal = 0.0;
  double actual = 0.0;
};

double pooled_delta(const std::vector<RunSums>& sums, const std::vector<int>& idx) {
  double si = 0.0, sa = 0.0;
  for (int i : idx) {
    si += sums[i].ideal;
    sa += sums[i].actual;
  }
  return (sa - si) / si;
}

std::vector<int> identity_index(int runs) {
  std::vector<int> idx(runs);
  for (int i = 0; i < runs; ++i) idx[i] = i;
  return idx;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval percentile_95(std::vector<double> stats) {
  std::sort(stats.begin(), stats.end());
  int b = static_cast<int>(stats.size());
  return {stats[static_cast<int>(0.025 * b)], stats[static_cast<int>(0.975 * b)]};
}

std::vector<int> all_non_exit(const NavGraph& g) {
  std::vector<int> out;
  out.reserve(g.node_count() - 1);
  for (int v = 0; v < g.node_count(); ++v)
    if (v != g.exit_node()) out.push_back(v);
  return out;
}

// --- criterion 1: deadline arithmetic ---------------------------------------

Criterion c1_deadline() {
  bool exact = compute_deadline(3600.0, 300.0, 1500.0) == 1800.0;
  bool defaulted = compute_deadline(ScenarioConfig{}) == 1800.0;
  bool rejected = false;
  try {
    compute_deadline(1000.0, 600.0, 500.0);
  } catch (const ConfigError&) {
    rejected = true;
  }
  return {exact && defaulted && rejected,
          "T_D(3600, 300, 1500) = 1800 s exactly; non-positive deadlines rejected"};
}

// --- criterion 2: budget safety on random graphs ----------------------------

Criterion c2_budget_safety() {
  const int graphs = 200;
  long long feasible = 0, skipped = 0, violations = 0;
  for (int i = 0; i < graphs; ++i) {
    SyntheticSpec spec;
    spec.nodes_total = 20 + (i * 7) % 81;  // 20..100 nodes
    spec.decks = 2 + i % 2;
    spec.passage_edges = spec.nodes_total + spec.nodes_total / 3;
    spec.stair_edges = 4;
    NavGraph g = generate_synthetic(spec, 1000 + i);
    ScenarioConfig cfg;
    cfg.static_field = true;
    cfg.master_seed = 7000 + i;
    RunResult r = run_single(g, cfg, all_non_exit(g), 0);
    for (const EvacueeOutcome& e : r.evacuees) {
      if (e.start_infeasible) {
        ++skipped;
        continue;
      }
      ++feasible;
      if (e.deadline_violated || e.arrival_s > r.deadline_s) ++violations;
    }
  }
  return {violations == 0 && feasible > 0,
          format("%d graphs, %lld feasible starts (%lld outside the guarantee), %lld violations",
                 graphs, feasible, skipped, violations)};
}

// --- criterion 3: oracle equivalence on exhaustive small graphs -------------
//
// Every connected labeled graph on 2..6 nodes (27,475 of them), random static
// weights, exit at node 0. The simulated ideal arrival from each start must
// match a brute-force enumeration of simple paths minimizing typical time
// subject to the stepwise worst-case budget test.

double brute_force_route(const NavGraph& g, const FieldSnapshot& snap,
                         const WorstCaseDistances& wd, int start, double deadline) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> used(g.node_count(), 0);
  auto dfs = [&](auto&& self, int v, double spent) -> void {
    if (v == g.exit_node()) {
      best = std::min(best, spent);
      return;
    }
    for (const Neighbor& nb : g.neighbors(v)) {
      if (used[nb.node]) continue;
      if (wd.t_worst[nb.edge] + wd.W[nb.node] > deadline - spent) continue;
      used[nb.node] = 1;
      self(self, nb.node, spent + snap.t_typical[nb.edge]);
      used[nb.node] = 0;
    }
  };
  used[start] = 1;
  dfs(dfs, start, 0.0);
  return best;
}

Criterion c3_oracle_equivalence() {
  ScenarioConfig base;
  base.static_field = true;
  const double deadline = compute_deadline(base);
  long long graphs_checked = 0, starts_checked = 0;
  double max_rel = 0.0;
  for (int n = 2; n <= 6; ++n) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
    const unsigned masks = 1u << pairs.size();
    for (unsigned mask = 1; mask < masks; ++mask) {
      std::array<int, 6> parent{};
      for (int v = 0; v < n; ++v) parent[v] = v;
      auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
      };
      int components = n;
      for (std::size_t b = 0; b < pairs.size(); ++b)
        if (mask >> b & 1) {
          int ra = find(pairs[b].first), rb = find(pairs[b].second);
          if (ra != rb) {
            parent[ra] = rb;
            --components;
          }
        }
      if (components != 1) continue;

      std::uint64_t graph_key = (static_cast<std::uint64_t>(n) << 32) | mask;
      Rng lengths(derive_run_seed(0xC3, graph_key));
      std::vector<NodeRecord> nodes;
      for (int v = 0; v < n; ++v)
        nodes.push_back({v, 0, static_cast<double>(v), 0.0, v == 0});
      std::vector<EdgeRecord> edges;
      for (std::size_t b = 0; b < pairs.size(); ++b)
        if (mask >> b & 1)
          edges.push_back(
              {pairs[b].first, pairs[b].second, lengths.uniform(2.0, 15.0), EdgeKind::passage});
      NavGraph g = NavGraph::make(std::move(nodes), std::move(edges));

      ScenarioConfig cfg = base;
      cfg.master_seed = derive_run_seed(0xF1E1D, graph_key);
      WorstCaseDistances wd = worst_case_distances(g, cfg.v_worst);
      RunResult r = run_single(g, cfg, all_non_exit(g), 0, &wd);
      TraversalTimeField field(g, cfg.v_worst, cfg.v_nominal, r.field_seed,
                               cfg.field_correlation, true);
      FieldSnapshot snap = field.freeze_snapshot();
      for (const EvacueeOutcome& e : r.evacuees) {
        double oracle = brute_force_route(g, snap, wd, e.start_node, deadline);
        if (!std::isfinite(oracle))
          return {false, format("oracle found no route on n=%d mask=%u", n, mask)};
        max_rel = std::max(max_rel,
                           std::abs(e.arrival_s - oracle) / std::max(1.0, oracle));
        ++starts_checked;
      }
      ++graphs_checked;
    }
  }
  bool pass = graphs_checked == 27475 && max_rel <= 1e-9;
  return {pass, format("%lld connected graphs, %lld starts, max relative error %.2e",
                       graphs_checked, starts_checked, max_rel)};
}

// --- criterion 4: delay-depth effect rises then plateaus --------------------

Criterion c4_delay_depth(const NavGraph& g, ExperimentOutput& sod_out) {
  const int runs = 100;
  ScenarioConfig cfg;
  cfg.master_seed = kMasterSeed;
  ExperimentSpec spec;
  spec.runs = runs;
  for (int s = 1; s <= 5; ++s) spec.grid.push_back({0.1, s, 0.0});
  sod_out = run_experiment(g, cfg, spec);

  std::vector<std::vector<RunSums>> sums(6, std::vector<RunSums>(runs));
  for (const ResultRow& r : sod_out.rows) {
    sums[r.sod][r.run_id].ideal += r.t_ideal_s;
    sums[r.sod][r.run_id].actual += r.t_actual_s;
  }
  std::vector<int> all = identity_index(runs);
  std::array<double, 6> point{};
  for (int s = 1; s <= 5; ++s) point[s] = pooled_delta(sums[s], all);

  Rng rng(123456789);
  std::vector<double> d3(kBootstrapSamples), rise(kBootstrapSamples);
  for (int b = 0; b < kBootstrapSamples; ++b) {
    std::vector<int> idx(runs);
    for (int i = 0; i < runs; ++i) idx[i] = rng.uniform_int(runs);
    double p1 = pooled_delta(sums[1], idx), p3 = pooled_delta(sums[3], idx);
    d3[b] = p3;
    rise[b] = p3 - p1;
  }
  Interval ci3 = percentile_95(d3);
  Interval ci_rise = percentile_95(rise);

  bool rises = point[1] < point[3] && ci_rise.lo > 0.0;
  bool plateaus = point[4] <= ci3.hi && point[5] <= ci3.hi;
  return {rises && plateaus,
          format("delta(1)=%.4f < delta(3)=%.4f, rise CI [%.4f, %.4f]; "
                 "delta(4)=%.4f, delta(5)=%.4f vs hi95(delta(3))=%.4f",
                 point[1], point[3], ci_rise.lo, ci_rise.hi, point[4], point[5], ci3.hi)};
}

// --- criterion 5: delay-probability effect monotone up to 0.4 ---------------
//
// 16 runs per grid point: the increment tolerance clause compares the
// 0.4 -> 0.5 step against the bootstrap width, which scales with the run
// count; this pinned count keeps the clause aligned with the rise test.

Criterion c5_delay_probability(const NavGraph& g) {
  const int runs = 16;
  ScenarioConfig cfg;
  cfg.master_seed = kMasterSeed;
  ExperimentSpec spec;
  spec.runs = runs;
  for (int s : {1, 2, 3})
    for (int p = 0; p <= 5; ++p) spec.grid.push_back({p / 10.0, s, 0.0});
  ExperimentOutput out = run_experiment(g, cfg, spec);

  auto key = [](double pod, int sod) { return sod * 100 + static_cast<int>(pod * 10 + 0.5); };
  std::vector<std::vector<RunSums>> sums(400, std::vector<RunSums>(runs));
  for (const ResultRow& r : out.rows) {
    sums[key(r.pod, r.sod)][r.run_id].ideal += r.t_ideal_s;
    sums[key(r.pod, r.sod)][r.run_id].actual += r.t_actual_s;
  }
  std::vector<int> all = identity_index(runs);

  bool pass = true;
  std::string detail;
  for (int s : {1, 2, 3}) {
    Rng rng(987654321);
    std::vector<double> rise(kBootstrapSamples), level(kBootstrapSamples);
    for (int b = 0; b < kBootstrapSamples; ++b) {
      std::vector<int> idx(runs);
      for (int i = 0; i < runs; ++i) idx[i] = rng.uniform_int(runs);
      double p0 = pooled_delta(sums[key(0.0, s)], idx);
      double p4 = pooled_delta(sums[key(0.4, s)], idx);
      rise[b] = p4 - p0;
      level[b] = p4;
    }
    Interval ci_rise = percentile_95(rise);
    Interval ci_level = percentile_95(level);
    double width = ci_level.hi - ci_level.lo;
    double increment =
        pooled_delta(sums[key(0.5, s)], all) - pooled_delta(sums[key(0.4, s)], all);
    bool s_ok = ci_rise.lo > 0.0 && increment <= width;
    pass = pass && s_ok;
    detail += format("%ssod%d: rise lo95=%.4f, inc=%.4f vs width=%.4f",
                     detail.empty() ? "" : "; ", s, ci_rise.lo, increment, width);
  }
  return {pass, detail};
}

// --- criterion 6: error effect non-negative, bounded, and rising ------------

Criterion c6_error_effect(const NavGraph& g) {
  const int runs = 200;
  ScenarioConfig cfg;
  cfg.master_seed = kMasterSeed;
  cfg.static_field = true;
  ExperimentSpec spec;
  spec.runs = runs;
  for (int e = 0; e <= 5; ++e) spec.grid.push_back({0.0, 0, e / 10.0});
  ExperimentOutput out = run_experiment(g, cfg, spec);

  std::vector<std::vector<RunSums>> sums(6, std::vector<RunSums>(runs));
  for (const ResultRow& r : out.rows)
    for (int e = 0; e <= 5; ++e)
      if (r.poe == e / 10.0) {
        sums[e][r.run_id].ideal += r.t_ideal_s;
        sums[e][r.run_id].actual += r.t_actual_s;
      }
  std::vector<int> all = identity_index(runs);

  bool nonneg = true, nondecreasing = true;
  std::array<double, 6> point{};
  for (int e = 0; e <= 5; ++e) {
    point[e] = pooled_delta(sums[e], all);
    if (point[e] < 0.0) nonneg = false;
    if (e >= 1 && e <= 4 && point[e] < point[e - 1]) nondecreasing = false;
  }

  Rng rng(5555);
  std::vector<double> rise(kBootstrapSamples);
  for (int b = 0; b < kBootstrapSamples; ++b) {
    std::vector<int> idx(runs);
    for (int i = 0; i < runs; ++i) idx[i] = rng.uniform_int(runs);
    rise[b] = pooled_delta(sums[4], idx) - pooled_delta(sums[0], idx);
  }
  Interval ci_rise = percentile_95(rise);

  // per-node mean delta must be >= 0 for at least 99% of nodes at every point
  double min_fraction = 1.0;
  for (int e = 1; e <= 5; ++e) {
    std::vector<double> delta_sum(g.node_count(), 0.0);
    std::vector<int> count(g.node_count(), 0);
    for (const ResultRow& r : out.rows)
      if (r.poe == e / 10.0) {
        delta_sum[r.node_id] += node_delta(r.t_actual_s, r.t_ideal_s);
        ++count[r.node_id];
      }
    long long ok = 0, total = 0;
    for (int v = 0; v < g.node_count(); ++v)
      if (count[v]) {
        ++total;
        if (delta_sum[v] / count[v] >= 0.0) ++ok;
      }
    min_fraction = std::min(min_fraction, static_cast<double>(ok) / total);
  }

  bool pass = nonneg && nondecreasing && ci_rise.lo > 0.0 && min_fraction >= 0.99;
  return {pass, format("deltas %.4f..%.4f nondecreasing to 0.4: %s; rise CI lo=%.4f; "
                       "min per-node nonneg fraction %.4f",
                       point[0], point[4], nondecreasing ? "yes" : "NO", ci_rise.lo,
                       min_fraction)};
}

// --- criterion 7: combined perturbations exceed each alone ------------------

Criterion c7_combined(const NavGraph& g) {
  const int runs = 100;
  ScenarioConfig cfg;
  cfg.master_seed = kMasterSeed;
  ExperimentSpec spec;
  spec.runs = runs;
  spec.grid.push_back({0.4, 3, 0.4});  // combined
  spec.grid.push_back({0.4, 3, 0.0});  // delay only
  spec.grid.push_back({0.0, 0, 0.4});  // error only
  ExperimentOutput out = run_experiment(g, cfg, spec);

  std::vector<std::vector<RunSums>> sums(3, std::vector<RunSums>(runs));
  for (const ResultRow& r : out.rows) {
    int k = r.pod == 0.4 ? (r.poe == 0.4 ? 0 : 1) : 2;
    sums[k][r.run_id].ideal += r.t_ideal_s;
    sums[k][r.run_id].actual += r.t_actual_s;
  }
  std::vector<int> all = identity_index(runs);
  double combined = pooled_delta(sums[0], all);
  double delay_only = pooled_delta(sums[1], all);
  double error_only = pooled_delta(sums[2], all);

  Rng rng(77777);
  std::vector<double> margin(kBootstrapSamples);
  for (int b = 0; b < kBootstrapSamples; ++b) {
    std::vector<int> idx(runs);
    for (int i = 0; i < runs; ++i) idx[i] = rng.uniform_int(runs);
    margin[b] = pooled_delta(sums[0], idx) -
                std::max(pooled_delta(sums[1], idx), pooled_delta(sums[2], idx));
  }
  Interval ci = percentile_95(margin);

  bool pass = combined > std::max(delay_only, error_only) && ci.lo > 0.0;
  return {pass, format("combined=%.3f vs delay=%.3f, error=%.3f; margin CI [%.4f, %.4f]",
                       combined, delay_only, error_only, ci.lo, ci.hi)};
}

// --- criterion 8: majority of nodes degrade under delay ---------------------

Criterion c8_majority_positive(const ExperimentOutput& sod_out) {
  if (sod_out.aggregates.size() != 5)
    return {false, "delay-depth experiment data unavailable"};
  double min_fraction = 1.0, max_fraction = 0.0;
  for (const AggregateMetric& a : sod_out.aggregates) {
    min_fraction = std::min(min_fraction, a.fraction_positive);
    max_fraction = std::max(max_fraction, a.fraction_positive);
  }
  return {min_fraction > 0.5,
          format("fraction of nodes with mean delta > 0 spans %.4f..%.4f across depths 1..5",
                 min_fraction, max_fraction)};
}

// --- criterion 9: byte-identical outputs across workers and repetitions -----

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Criterion c9_reproducibility() {
  const std::string cli = EVACSIM_CLI_PATH;
  auto base = std::filesystem::temp_directory_path() / "evacsim_acceptance_c9";
  std::filesystem::remove_all(base);
  std::string ref_runs, ref_agg;
  int invocations = 0;
  for (int rep = 0; rep < 3; ++rep) {
    for (int workers : {1, 8}) {
      auto dir = base / (std::to_string(rep) + "_" + std::to_string(workers));
      std::string cmd = "\"" + cli + "\" run --recipe random-deployment --runs 5 --seed " +
                        std::to_string(kMasterSeed) + " --workers " + std::to_string(workers) +
                        " --out \"" + dir.string() + "\" > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0)
        return {false, format("CLI invocation failed (rep %d, workers %d)", rep, workers)};
      std::string runs_text = slurp(dir / "runs.csv");
      std::string agg_text = slurp(dir / "aggregate.csv");
      if (ref_runs.empty()) {
        ref_runs = runs_text;
        ref_agg = agg_text;
      } else if (runs_text != ref_runs || agg_text != ref_agg) {
        return {false, format("output diverged at rep %d, workers %d", rep, workers)};
      }
      ++invocations;
    }
  }
  return {invocations == 6,
          format("%d invocations (3 repetitions x workers {1, 8}) byte-identical, "
                 "runs.csv %zu bytes",
                 invocations, ref_runs.size())};
}

// --- criterion 10: liveness under extreme error ------------------------------

Criterion c10_liveness(const NavGraph& g) {
  ScenarioConfig cfg;
  cfg.master_seed = kMasterSeed;
  cfg.poe = 0.9;
  WorstCaseDistances wd = worst_case_distances(g, cfg.v_worst);
  const double deadline = compute_deadline(cfg);
  std::vector<int> starts = all_non_exit(g);
  double worst = 0.0;
  for (int r = 0; r < 10; ++r) {
    RunResult res = run_single(g, cfg, starts, r, &wd);
    for (const EvacueeOutcome& e : res.evacuees) worst = std::max(worst, e.arrival_s);
  }
  bool pass = worst <= 100.0 * deadline;
  return {pass, format("worst arrival %.0f s = %.1fx deadline (cap 100x)", worst,
                       worst / deadline)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* title, const Criterion& c) {
    std::printf("[%s] criterion %d: %s - %s\n", c.pass ? "PASS" : "FAIL", id, title,
                c.detail.c_str());
    std::fflush(stdout);
    if (!c.pass) ++failures;
  };

  report(1, "deadline arithmetic", guarded(c1_deadline));
  report(2, "budget safety on random graphs", guarded(c2_budget_safety));
  report(3, "oracle equivalence on exhaustive small graphs", guarded(c3_oracle_equivalence));

  NavGraph g = generate_synthetic(SyntheticSpec{}, kGraphSeed);
  ExperimentOutput sod_out;  // shared by criteria 4 and 8
  report(4, "delay-depth effect rises then plateaus",
         guarded([&] { return c4_delay_depth(g, sod_out); }));
  report(5, "delay-probability effect monotone up to 0.4",
         guarded([&] { return c5_delay_probability(g); }));
  report(6, "error effect non-negative, bounded, and rising",
         guarded([&] { return c6_error_effect(g); }));
  report(7, "combined perturbations exceed each alone", guarded([&] { return c7_combined(g); }));
  report(8, "majority of nodes degrade under delay",
         guarded([&] { return c8_majority_positive(sod_out); }));
  report(9, "byte-identical outputs across workers and repetitions",
         guarded(c9_reproducibility));
  report(10, "liveness under extreme error", guarded([&] { return c10_liveness(g); }));

  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
