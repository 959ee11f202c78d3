#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "evacsim/errors.hpp"
#include "evacsim/nav_graph.hpp"
#include "evacsim/traversal_field.hpp"

namespace evacsim {

namespace detail {

/// Exact single-source shortest distances to the exit, undirected, with the
/// given per-edge weights (all positive by construction).
inline std::vector<double> shortest_to_exit(const NavGraph& g,
                                            const std::vector<double>& edge_weight) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.node_count(), inf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[g.exit_node()] = 0.0;
  heap.push({0.0, g.exit_node()});
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (const Neighbor& nb : g.neighbors(v)) {
      double nd = d + edge_weight[nb.edge];
      if (nd < dist[nb.node]) {
        dist[nb.node] = nd;
        heap.push({nd, nb.node});
      }
    }
  }
  return dist;
}

}  // namespace detail

/// Worst-case-time shortest distances to the exit, plus the per-edge
/// worst-case times they were computed from. Depends only on the graph and
/// v_worst, so one instance serves every epoch of a run.
struct WorstCaseDistances {
  std::vector<double> W;        // per node, seconds
  std::vector<double> t_worst;  // per edge, length / v_worst
};

inline WorstCaseDistances worst_case_distances(const NavGraph& g, double v_worst) {
  if (!(v_worst > 0.0)) throw ConfigError("v_worst must be positive");
  WorstCaseDistances out;
  out.t_worst.reserve(g.edge_count());
  for (const EdgeRecord& e : g.edges()) out.t_worst.push_back(e.length / v_worst);
  out.W = detail::shortest_to_exit(g, out.t_worst);
  return out;
}

/// One advisory tuple: the neighbor, both cached edge times, and the cached
/// distances-to-exit of the neighbor under typical and worst weights.
struct RouteEntry {
  int neighbor = -1;
  int edge = -1;  // index into NavGraph::edges()
  double t_typ_edge = 0.0;
  double t_worst_edge = 0.0;
  double d_typ_neighbor = 0.0;
  double w_neighbor = 0.0;
};

/// Per-node routing table derived from one field snapshot. Immutable after
/// construction; entries are sorted by neighbor id.
struct LookupTable {
  std::int64_t epoch = 0;
  std::vector<double> d_typ;                     // per node, seconds
  std::vector<std::vector<RouteEntry>> entries;  // per node
};

inline LookupTable build_table(const NavGraph& g, const FieldSnapshot& snapshot,
                               const WorstCaseDistances& wd) {
  if (static_cast<int>(snapshot.t_typical.size()) != g.edge_count())
    throw ValidationError("snapshot does not cover all edges");
  LookupTable table;
  table.epoch = snapshot.epoch;
  table.d_typ = detail::shortest_to_exit(g, snapshot.t_typical);
  table.entries.resize(g.node_count());
  for (int v = 0; v < g.node_count(); ++v) {
    auto nbs = g.neighbors(v);
    table.entries[v].reserve(nbs.size());
    for (const Neighbor& nb : nbs) {
      RouteEntry entry;
      entry.neighbor = nb.node;
      entry.edge = nb.edge;
      entry.t_typ_edge = snapshot.t_typical[nb.edge];
      entry.t_worst_edge = wd.t_worst[nb.edge];
      entry.d_typ_neighbor = table.d_typ[nb.node];
      entry.w_neighbor = wd.W[nb.node];
      table.entries[v].push_back(entry);
    }
  }
  return table;
}

/// Advised step out of a node: the chosen entry, and whether the worst-case
/// budget test failed for every neighbor (best-effort fallback).
struct HopChoice {
  RouteEntry entry;
  bool infeasible = false;
};

/// Selects the neighbor minimizing typical time to exit among those whose
/// worst-case bound fits the remaining budget; falls back to the minimal
/// worst-case route (flagged) when no neighbor fits. Ties break toward the
/// smallest neighbor id. The exit node yields no hop.
inline std::optional<HopChoice> next_hop(const LookupTable& table, int node, double budget) {
  if (node < 0 || node >= static_cast<int>(table.entries.size()))
    throw ValidationError("unknown node id " + std::to_string(node));
  if (table.d_typ[node] == 0.0) return std::nullopt;  // exit: positive weights
  const auto& entries = table.entries[node];
  const RouteEntry* best_feasible = nullptr;
  double best_feasible_cost = 0.0;
  const RouteEntry* best_fallback = nullptr;
  double best_fallback_cost = 0.0;
  for (const RouteEntry& entry : entries) {
    double worst_cost = entry.t_worst_edge + entry.w_neighbor;
    if (worst_cost <= budget) {
      double cost = entry.t_typ_edge + entry.d_typ_neighbor;
      if (!best_feasible || cost < best_feasible_cost) {
        best_feasible = &entry;
        best_feasible_cost = cost;
      }
    }
    if (!best_fallback || worst_cost < best_fallback_cost) {
      best_fallback = &entry;
      best_fallback_cost = worst_cost;
    }
  }
  if (best_feasible) return HopChoice{*best_feasible, false};
  if (best_fallback) return HopChoice{*best_fallback, true};
  return std::nullopt;  // unreachable on a connected graph: non-exit nodes have neighbors
}

/// History of the most recent lookup tables, newest last. Capacity bounds
/// how deep a stale read can reach; epochs are consecutive by construction.
class SnapshotRing {
 public:
  explicit SnapshotRing(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw ConfigError("ring capacity must be >= 1");
  }

  void push(LookupTable table) {
    if (!tables_.empty() && table.epoch != tables_.back().epoch + 1)
      throw ValidationError("ring epoch gap: expected " +
                            std::to_string(tables_.back().epoch + 1) + ", got " +
                            std::to_string(table.epoch));
    tables_.push_back(std::move(table));
    if (static_cast<int>(tables_.size()) > capacity_) tables_.pop_front();
  }

  /// Table of epoch (newest − depth), clamped to the oldest held table.
  const LookupTable& read(int depth) const {
    if (tables_.empty()) throw SimulationError("read from empty snapshot ring");
    if (depth < 0) throw ValidationError("negative stale depth");
    int idx = static_cast<int>(tables_.size()) - 1 - depth;
    if (idx < 0) idx = 0;
    return tables_[idx];
  }

  bool empty() const { return tables_.empty(); }
  int size() const { return static_cast<int>(tables_.size()); }
  std::int64_t newest_epoch() const { return read(0).epoch; }
  int capacity() const { return capacity_; }

 private:
  int capacity_;
  std::deque<LookupTable> tables_;
};

/// Trace of repeatedly following next_hop under one fixed table, consuming
/// the table's own typical times as durations. Test and analysis helper; the
/// event-driven simulator handles the epoch-advancing case.
struct PolicyTrace {
  std::vector<int> path;  // visited nodes, start through exit
  double total_time = 0.0;
  bool any_infeasible = false;
};

inline PolicyTrace follow_policy(const LookupTable& table, int start, double budget) {
  PolicyTrace trace;
  trace.path.push_back(start);
  int node = start;
  const long long guard =
      4LL * static_cast<long long>(table.entries.size()) + 1000000LL;
  long long steps = 0;
  while (table.d_typ[node] != 0.0) {
    if (++steps > guard) throw SimulationError("policy trace failed to terminate");
    auto hop = next_hop(table, node, budget);
    if (!hop) throw SimulationError("no hop from non-exit node");
    trace.any_infeasible = trace.any_infeasible || hop->infeasible;
    trace.total_time += hop->entry.t_typ_edge;
    budget -= hop->entry.t_typ_edge;
    node = hop->entry.neighbor;
    trace.path.push_back(node);
  }
  return trace;
}

}  // namespace evacsim
