#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "evacsim/errors.hpp"
#include "evacsim/nav_graph.hpp"
#include "evacsim/rng.hpp"
#include "evacsim/route_tables.hpp"
#include "evacsim/traversal_field.hpp"

namespace evacsim {

/// Scenario parameters. Times are seconds, speeds m/s; the deadline is
/// derived, never stored.
struct ScenarioConfig {
  double t_survival = 3600.0;     // T_S
  double t_awareness = 300.0;     // T_A
  double t_embarkation = 1500.0;  // T_EL
  double refresh_interval = 5.0;  // field change + table rebuild period
  double pod = 0.0;               // probability a decision uses stale data
  int sod = 0;                    // staleness depth, in refresh epochs
  double poe = 0.0;               // probability a decision is a random edge
  double v_worst = 0.067;
  double v_nominal = 0.67;
  bool static_field = false;
  double field_correlation = 0.45;  // epoch-to-epoch field autocorrelation
  std::uint64_t master_seed = 0;

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError(std::string(name) + " must lie in [0, 1]");
    };
    prob(pod, "pod");
    prob(poe, "poe");
    if (sod < 0) throw ConfigError("sod must be non-negative");
    if (!(refresh_interval > 0.0)) throw ConfigError("refresh_interval must be positive");
    if (!(v_worst > 0.0) || !(v_nominal > 0.0)) throw ConfigError("speeds must be positive");
    if (v_worst > v_nominal) throw ConfigError("v_worst must not exceed v_nominal");
    if (t_survival < 0.0 || t_awareness < 0.0 || t_embarkation < 0.0)
      throw ConfigError("times must be non-negative");
    if (!(field_correlation >= 0.0) || field_correlation >= 1.0)
      throw ConfigError("field_correlation must lie in [0, 1)");
  }
};

/// T_D = T_S − T_A − T_EL; zero or negative deadlines are configuration
/// errors (the scenario leaves no time to evacuate).
inline double compute_deadline(double t_survival, double t_awareness, double t_embarkation) {
  if (t_survival < 0.0 || t_awareness < 0.0 || t_embarkation < 0.0)
    throw ConfigError("times must be non-negative");
  double deadline = t_survival - t_awareness - t_embarkation;
  if (!(deadline > 0.0)) throw ConfigError("non-positive deadline");
  return deadline;
}

inline double compute_deadline(const ScenarioConfig& c) {
  return compute_deadline(c.t_survival, c.t_awareness, c.t_embarkation);
}

enum class DecisionKind : int { advised = 0, stale_advised = 1, random_error = 2, fallback = 3 };
constexpr int kDecisionKinds = 4;

inline std::string_view to_string(DecisionKind k) {
  switch (k) {
    case DecisionKind::advised: return "advised";
    case DecisionKind::stale_advised: return "stale-advised";
    case DecisionKind::random_error: return "random-error";
    case DecisionKind::fallback: return "fallback";
  }
  return "?";
}

struct TrajectoryStep {
  int node = -1;  // node the decision was made at
  DecisionKind kind = DecisionKind::advised;
  int edge = -1;
  double duration = 0.0;  // field typical time at edge entry, frozen
};

struct EvacueeOutcome {
  int start_node = -1;
  double arrival_s = 0.0;
  bool deadline_violated = false;
  bool start_infeasible = false;  // W(start) > T_D: no worst-case guarantee
  std::array<int, kDecisionKinds> decisions{};
  std::vector<TrajectoryStep> trajectory;  // filled only when requested
};

struct RunResult {
  std::uint64_t run_seed = 0;
  std::uint64_t field_seed = 0;  // identifies the field realization
  ScenarioConfig config;
  double deadline_s = 0.0;
  std::vector<EvacueeOutcome> evacuees;  // same order as start_nodes
};

/// One event-driven run: independent evacuees walk the graph from their
/// start nodes while the field resamples and tables rebuild every refresh
/// interval. Decisions draw, in fixed order, a delay Bernoulli(PoD) picking
/// the table depth, then the advice, then an error Bernoulli(PoE) that
/// replaces the advice with a uniformly random incident edge.
///
/// `wd` may carry precomputed worst-case distances for this graph and
/// config (they are epoch-independent); pass nullptr to compute here.
inline RunResult run_single(const NavGraph& g, const ScenarioConfig& config,
                            const std::vector<int>& start_nodes, std::uint64_t run_index,
                            const WorstCaseDistances* wd = nullptr,
                            bool record_trajectories = false) {
  config.validate();
  const double deadline = compute_deadline(config);

  RunResult result;
  result.run_seed = derive_run_seed(config.master_seed, run_index);
  result.field_seed = derive_stream_seed(result.run_seed, "field");
  result.config = config;
  result.deadline_s = deadline;

  WorstCaseDistances local_wd;
  if (!wd) {
    local_wd = worst_case_distances(g, config.v_worst);
    wd = &local_wd;
  }

  TraversalTimeField field(g, config.v_worst, config.v_nominal, result.field_seed,
                           config.field_correlation, config.static_field);
  Rng rng_delay(derive_stream_seed(result.run_seed, "delay"));
  Rng rng_error(derive_stream_seed(result.run_seed, "error"));

  SnapshotRing ring(config.sod + 1);
  ring.push(build_table(g, field.freeze_snapshot(), *wd));

  result.evacuees.resize(start_nodes.size());
  for (std::size_t i = 0; i < start_nodes.size(); ++i) {
    int s = start_nodes[i];
    if (s < 0 || s >= g.node_count())
      throw ConfigError("start node " + std::to_string(s) + " outside graph");
    result.evacuees[i].start_node = s;
    result.evacuees[i].start_infeasible = wd->W[s] > deadline;
  }

  // Event order: time, then kind (refresh before arrivals), then actor,
  // then insertion sequence — a deterministic total order.
  enum : int { kRefresh = 0, kArrival = 1 };
  struct Event {
    double time;
    int kind;
    int actor;  // evacuee index; -1 for refresh
    long long seq;
    int node;  // arrival node
    bool operator>(const Event& o) const {
      if (time != o.time) return time > o.time;
      if (kind != o.kind) return kind > o.kind;
      if (actor != o.actor) return actor > o.actor;
      return seq > o.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  long long seq = 0;

  int active = 0;
  for (std::size_t i = 0; i < start_nodes.size(); ++i) {
    if (start_nodes[i] == g.exit_node()) {
      result.evacuees[i].arrival_s = 0.0;
      continue;
    }
    events.push({0.0, kArrival, static_cast<int>(i), seq++, start_nodes[i]});
    ++active;
  }
  // The static case is value-identical under resampling, so the refresh
  // events are skipped outright.
  if (!config.static_field && active > 0)
    events.push({config.refresh_interval, kRefresh, -1, seq++, -1});

  const double time_cap = 10000.0 * deadline;  // liveness backstop
  while (active > 0) {
    if (events.empty()) throw SimulationError("event queue drained with active evacuees");
    Event ev = events.top();
    events.pop();
    if (ev.time > time_cap) throw SimulationError("simulation exceeded liveness time cap");

    if (ev.kind == kRefresh) {
      field.resample();
      ring.push(build_table(g, field.freeze_snapshot(), *wd));
      events.push({ev.time + config.refresh_interval, kRefresh, -1, seq++, -1});
      continue;
    }

    EvacueeOutcome& out = result.evacuees[ev.actor];
    if (ev.node == g.exit_node()) {
      out.arrival_s = ev.time;
      out.deadline_violated = ev.time > deadline;
      --active;
      continue;
    }

    // Fixed draw order: delay, advice, error, then the error's edge choice.
    bool delayed = rng_delay.bernoulli(config.pod);
    const LookupTable& table = ring.read(delayed ? config.sod : 0);
    double budget = deadline - ev.time;
    auto hop = next_hop(table, ev.node, budget);
    if (!hop) throw SimulationError("no hop from non-exit node");

    bool error = rng_error.bernoulli(config.poe);
    int edge;
    DecisionKind kind;
    if (error) {
      auto nbs = g.neighbors(ev.node);
      edge = nbs[rng_error.uniform_int(static_cast<int>(nbs.size()))].edge;
      kind = DecisionKind::random_error;
    } else {
      edge = hop->entry.edge;
      kind = hop->infeasible ? DecisionKind::fallback
                             : (delayed ? DecisionKind::stale_advised : DecisionKind::advised);
    }

    double duration = field.t_typical(edge);  // frozen at entry
    int dest = g.edge(edge).a == ev.node ? g.edge(edge).b : g.edge(edge).a;
    ++out.decisions[static_cast<int>(kind)];
    if (record_trajectories) out.trajectory.push_back({ev.node, kind, edge, duration});
    events.push({ev.time + duration, kArrival, ev.actor, seq++, dest});
  }
  return result;
}

struct PairedResult {
  RunResult ideal;      // PoD = PoE = 0, same field realization
  RunResult perturbed;  // config as given
};

/// Common-random-numbers pair: both members derive the identical field
/// stream from (master_seed, run_index), so field values at any epoch agree;
/// only the delay/error injections differ.
inline PairedResult run_paired(const NavGraph& g, const ScenarioConfig& config,
                               const std::vector<int>& start_nodes, std::uint64_t run_index,
                               const WorstCaseDistances* wd = nullptr,
                               bool record_trajectories = false) {
  ScenarioConfig ideal_config = config;
  ideal_config.pod = 0.0;
  ideal_config.poe = 0.0;
  ideal_config.sod = 0;
  PairedResult pair;
  pair.ideal = run_single(g, ideal_config, start_nodes, run_index, wd, record_trajectories);
  pair.perturbed = run_single(g, config, start_nodes, run_index, wd, record_trajectories);
  return pair;
}

}  // namespace evacsim
