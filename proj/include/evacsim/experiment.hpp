#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "evacsim/errors.hpp"
#include "evacsim/metrics.hpp"
#include "evacsim/nav_graph.hpp"
#include "evacsim/rng.hpp"
#include "evacsim/simulation.hpp"

namespace evacsim {

enum class Recipe { sweep_sod, sweep_pod, random_deployment, sweep_poe, combined, custom };

inline std::string_view to_string(Recipe r) {
  switch (r) {
    case Recipe::sweep_sod: return "sweep-sod";
    case Recipe::sweep_pod: return "sweep-pod";
    case Recipe::random_deployment: return "random-deployment";
    case Recipe::sweep_poe: return "sweep-poe";
    case Recipe::combined: return "combined";
    case Recipe::custom: return "custom";
  }
  return "?";
}

inline Recipe parse_recipe(std::string_view name) {
  for (Recipe r : {Recipe::sweep_sod, Recipe::sweep_pod, Recipe::random_deployment,
                   Recipe::sweep_poe, Recipe::combined, Recipe::custom})
    if (name == to_string(r)) return r;
  throw ConfigError("unknown recipe '" + std::string(name) + "'");
}

struct GridPoint {
  double pod = 0.0;
  int sod = 0;
  double poe = 0.0;
};

struct ExperimentSpec {
  Recipe recipe = Recipe::custom;
  std::vector<GridPoint> grid;
  int runs = 1;
  bool users_all = true;  // all non-exit nodes; otherwise users_random per run
  int users_random = 0;
  bool fixed_placement = false;  // reuse run 0's random placement everywhere
  int workers = 1;
  std::string out_dir;  // empty: no files, results returned only
};

/// Installs one of the named experiment designs: the grid, the user
/// deployment, the run count, and (for the static-field study) the field
/// mode. Explicit CLI overrides are applied by the caller afterwards.
inline void apply_recipe(Recipe recipe, ScenarioConfig& config, ExperimentSpec& spec) {
  spec.recipe = recipe;
  spec.grid.clear();
  switch (recipe) {
    case Recipe::sweep_sod:
      for (int s = 1; s <= 5; ++s) spec.grid.push_back({0.1, s, 0.0});
      spec.runs = 100;
      spec.users_all = true;
      break;
    case Recipe::sweep_pod:
      for (int s : {1, 2, 3})
        for (int p = 0; p <= 5; ++p) spec.grid.push_back({p / 10.0, s, 0.0});
      spec.runs = 100;
      spec.users_all = true;
      break;
    case Recipe::random_deployment:
      for (int s = 1; s <= 5; ++s) spec.grid.push_back({0.1, s, 0.0});
      spec.runs = 53;
      spec.users_all = false;
      spec.users_random = 150;
      break;
    case Recipe::sweep_poe:
      for (int e = 0; e <= 5; ++e) spec.grid.push_back({0.0, 0, e / 10.0});
      spec.runs = 100;
      spec.users_all = true;
      config.static_field = true;
      break;
    case Recipe::combined:
      spec.grid.push_back({0.4, 3, 0.4});
      spec.runs = 100;
      spec.users_all = true;
      break;
    case Recipe::custom:
      break;  // grid supplied by the caller
  }
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double config_double(std::string_view v, std::string_view key) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("unparsable value '" + std::string(v) + "' for key " + std::string(key));
  return out;
}

inline long long config_int(std::string_view v, std::string_view key) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("unparsable value '" + std::string(v) + "' for key " + std::string(key));
  return out;
}

inline bool config_bool(std::string_view v, std::string_view key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("unparsable value '" + std::string(v) + "' for key " + std::string(key));
}

}  // namespace detail

struct ParsedConfig {
  ScenarioConfig config;
  ExperimentSpec spec;
};

/// Applies `users all` or `users random:<n>` to a spec.
inline void parse_users(std::string_view v, ExperimentSpec& spec) {
  if (v == "all") {
    spec.users_all = true;
    return;
  }
  if (v.starts_with("random:")) {
    long long n = detail::config_int(v.substr(7), "users");
    if (n < 1) throw ConfigError("users random:<n> requires n >= 1");
    spec.users_all = false;
    spec.users_random = static_cast<int>(n);
    return;
  }
  throw ConfigError("users must be 'all' or 'random:<n>'");
}

/// Flat `key=value` scenario/experiment file; '#' starts a comment line.
/// Unknown keys are rejected. Defaults are the published scenario.
inline ParsedConfig parse_config(std::string_view text) {
  ParsedConfig out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(line_no, "expected key=value, got '" + std::string(line) + "'");
    std::string_view key = detail::trim(line.substr(0, eq));
    std::string_view value = detail::trim(line.substr(eq + 1));
    ScenarioConfig& c = out.config;
    if (key == "t_s") c.t_survival = detail::config_double(value, key);
    else if (key == "t_a") c.t_awareness = detail::config_double(value, key);
    else if (key == "t_el") c.t_embarkation = detail::config_double(value, key);
    else if (key == "refresh_interval") c.refresh_interval = detail::config_double(value, key);
    else if (key == "pod") c.pod = detail::config_double(value, key);
    else if (key == "sod") c.sod = static_cast<int>(detail::config_int(value, key));
    else if (key == "poe") c.poe = detail::config_double(value, key);
    else if (key == "v_worst") c.v_worst = detail::config_double(value, key);
    else if (key == "v_nominal") c.v_nominal = detail::config_double(value, key);
    else if (key == "static_field") c.static_field = detail::config_bool(value, key);
    else if (key == "field_correlation") c.field_correlation = detail::config_double(value, key);
    else if (key == "seed") c.master_seed = static_cast<std::uint64_t>(detail::config_int(value, key));
    else if (key == "runs") out.spec.runs = static_cast<int>(detail::config_int(value, key));
    else if (key == "workers") out.spec.workers = static_cast<int>(detail::config_int(value, key));
    else if (key == "users") parse_users(value, out.spec);
    else if (key == "recipe") apply_recipe(parse_recipe(value), out.config, out.spec);
    else if (key == "out") out.spec.out_dir = std::string(value);
    else throw ConfigError("unknown key '" + std::string(key) + "'");
  }
  out.config.validate();
  compute_deadline(out.config);  // deadline must be positive
  return out;
}

struct ExperimentOutput {
  std::vector<ResultRow> rows;
  std::vector<AggregateMetric> aggregates;
  std::string summary;  // printable per-grid-point table
};

namespace detail {

/// Distinct non-exit start nodes for one run. Random deployments draw from
/// the run's own placement stream, so placement depends only on
/// (master_seed, run_index) — never on scheduling.
inline std::vector<int> placement_for_run(const NavGraph& g, const ScenarioConfig& config,
                                          const ExperimentSpec& spec, int run_index) {
  std::vector<int> pool;
  pool.reserve(g.node_count() - 1);
  for (int v = 0; v < g.node_count(); ++v)
    if (v != g.exit_node()) pool.push_back(v);
  if (spec.users_all) return pool;
  if (spec.users_random < 1 || spec.users_random > static_cast<int>(pool.size()))
    throw ConfigError("random user count must lie in 1.." + std::to_string(pool.size()));
  int source_run = spec.fixed_placement ? 0 : run_index;
  std::uint64_t run_seed = derive_run_seed(config.master_seed, source_run);
  Rng rng(derive_stream_seed(run_seed, "placement"));
  // Partial Fisher-Yates: the first users_random entries become the sample.
  std::vector<int> ids = pool;
  std::vector<int> sample;
  sample.reserve(spec.users_random);
  int remaining = static_cast<int>(ids.size());
  for (int k = 0; k < spec.users_random; ++k) {
    int pick = k + rng.uniform_int(remaining - k);
    std::swap(ids[k], ids[pick]);
    sample.push_back(ids[k]);
  }
  return sample;
}

inline void append_summary_row(std::string& out, const AggregateMetric& a, std::string_view flags) {
  char buf[160];
  int n = std::snprintf(buf, sizeof(buf), "  %5.2f  %3d  %5.2f  %12.6f  %s\n", a.pod, a.sod,
                        a.poe, a.delta_avg, std::string(flags).c_str());
  out.append(buf, buf + n);
}

}  // namespace detail

/// Executes the grid: `runs` paired simulations per grid point, fanned out
/// over a worker pool. Results and files are byte-identical for any worker
/// count: seeds and placements derive from run indices alone, and the merge
/// is order-normalized. Writes runs.csv and aggregate.csv under out_dir
/// when set.
inline ExperimentOutput run_experiment(const NavGraph& g, const ScenarioConfig& base_config,
                                       const ExperimentSpec& spec) {
  base_config.validate();
  if (spec.grid.empty()) throw ConfigError("experiment grid is empty");
  if (spec.runs < 1) throw ConfigError("runs must be >= 1");
  if (spec.workers < 1) throw ConfigError("workers must be >= 1");
  for (const GridPoint& p : spec.grid) {
    ScenarioConfig probe = base_config;
    probe.pod = p.pod;
    probe.sod = p.sod;
    probe.poe = p.poe;
    probe.validate();
  }
  compute_deadline(base_config);  // reject non-positive deadlines up front
  {
    std::vector<std::tuple<double, int, double>> keys;
    for (const GridPoint& p : spec.grid) keys.emplace_back(p.pod, p.sod, p.poe);
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
      throw ConfigError("duplicate grid point");
  }

  const WorstCaseDistances wd = worst_case_distances(g, base_config.v_worst);
  std::vector<std::vector<int>> starts(spec.runs);
  for (int r = 0; r < spec.runs; ++r)
    starts[r] = detail::placement_for_run(g, base_config, spec, r);

  // Phase 1: ideal member per run index (shared by every grid point via
  // common random numbers). Phase 2: perturbed member per (grid, run).
  ScenarioConfig ideal_config = base_config;
  ideal_config.pod = 0.0;
  ideal_config.sod = 0;
  ideal_config.poe = 0.0;

  const int points = static_cast<int>(spec.grid.size());
  std::vector<RunResult> ideal(spec.runs);
  std::vector<RunResult> perturbed(static_cast<std::size_t>(points) * spec.runs);

  auto parallel_for = [&](long long total, auto&& body) {
    std::atomic<long long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
      for (;;) {
        long long idx = next.fetch_add(1);
        if (idx >= total) return;
        try {
          body(idx);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    int n_threads = spec.workers;
    if (n_threads == 1) {
      worker();
    } else {
      std::vector<std::thread> threads;
      threads.reserve(n_threads);
      for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
      for (std::thread& t : threads) t.join();
    }
    if (failure) std::rethrow_exception(failure);
  };

  parallel_for(spec.runs, [&](long long idx) {
    int r = static_cast<int>(idx);
    ideal[r] = run_single(g, ideal_config, starts[r], r, &wd);
  });
  parallel_for(static_cast<long long>(points) * spec.runs, [&](long long idx) {
    int gi = static_cast<int>(idx / spec.runs);
    int r = static_cast<int>(idx % spec.runs);
    ScenarioConfig c = base_config;
    c.pod = spec.grid[gi].pod;
    c.sod = spec.grid[gi].sod;
    c.poe = spec.grid[gi].poe;
    perturbed[idx] = run_single(g, c, starts[r], r, &wd);
  });

  ExperimentOutput out;
  out.rows.reserve(perturbed.size() * (starts.empty() ? 0 : starts[0].size()));
  for (int gi = 0; gi < points; ++gi) {
    for (int r = 0; r < spec.runs; ++r) {
      const RunResult& pi = ideal[r];
      const RunResult& pp = perturbed[static_cast<std::size_t>(gi) * spec.runs + r];
      for (std::size_t e = 0; e < pp.evacuees.size(); ++e) {
        ResultRow row;
        row.run_id = r;
        row.seed = pp.run_seed;
        row.pod = spec.grid[gi].pod;
        row.sod = spec.grid[gi].sod;
        row.poe = spec.grid[gi].poe;
        row.node_id = pp.evacuees[e].start_node;
        row.t_ideal_s = pi.evacuees[e].arrival_s;
        row.t_actual_s = pp.evacuees[e].arrival_s;
        row.deadline_violated = pp.evacuees[e].deadline_violated;
        out.rows.push_back(row);
      }
    }
  }

  for (int gi = 0; gi < points; ++gi) {
    std::vector<ResultRow> point_rows;
    point_rows.reserve(static_cast<std::size_t>(spec.runs) * starts[0].size());
    for (const ResultRow& row : out.rows)
      if (row.pod == spec.grid[gi].pod && row.sod == spec.grid[gi].sod &&
          row.poe == spec.grid[gi].poe)
        point_rows.push_back(row);
    out.aggregates.push_back(
        aggregate_rows(point_rows, spec.grid[gi].pod, spec.grid[gi].sod, spec.grid[gi].poe));
  }
  std::sort(out.aggregates.begin(), out.aggregates.end(),
            [](const AggregateMetric& a, const AggregateMetric& b) {
              return std::tie(a.pod, a.sod, a.poe) < std::tie(b.pod, b.sod, b.poe);
            });

  // Summary table with the extremal grid points flagged.
  out.summary = "    pod  sod    poe     delta_avg  flags\n";
  for (const AggregateMetric& a : out.aggregates) {
    std::string flags;
    bool max_over_sod = true, max_over_pod = true, has_sod_peer = false, has_pod_peer = false;
    for (const AggregateMetric& b : out.aggregates) {
      if (b.pod == a.pod && b.poe == a.poe && b.sod != a.sod) {
        has_sod_peer = true;
        if (b.delta_avg > a.delta_avg) max_over_sod = false;
      }
      if (b.sod == a.sod && b.poe == a.poe && b.pod != a.pod) {
        has_pod_peer = true;
        if (b.delta_avg > a.delta_avg) max_over_pod = false;
      }
    }
    if (has_sod_peer && max_over_sod) flags += "max-over-sod ";
    if (has_pod_peer && max_over_pod) flags += "max-over-pod ";
    if (!flags.empty() && flags.back() == ' ') flags.pop_back();
    detail::append_summary_row(out.summary, a, flags);
  }

  if (!spec.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(spec.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + spec.out_dir);
    write_results_csv(out.rows, (std::filesystem::path(spec.out_dir) / "runs.csv").string());
    write_aggregate_csv(out.aggregates,
                        (std::filesystem::path(spec.out_dir) / "aggregate.csv").string());
  }
  return out;
}

}  // namespace evacsim
