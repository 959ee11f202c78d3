#pragma once

// Shared helpers for the test suite: tiny graph builders, an exhaustive
// route oracle, and small statistics utilities.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "evacsim/nav_graph.hpp"
#include "evacsim/route_tables.hpp"
#include "evacsim/traversal_field.hpp"

namespace testsupport {

/// Path graph node 0 - node 1 - ... - node (n-1), exit at the last node,
/// every edge `length` meters.
inline evacsim::NavGraph path_graph(int n, double length = 6.7) {
  std::vector<evacsim::NodeRecord> nodes(n);
  for (int i = 0; i < n; ++i) nodes[i] = {i, 0, static_cast<double>(i), 0.0, i == n - 1};
  std::vector<evacsim::EdgeRecord> edges;
  for (int i = 0; i + 1 < n; ++i)
    edges.push_back({i, i + 1, length, evacsim::EdgeKind::passage});
  return evacsim::NavGraph::make(std::move(nodes), std::move(edges));
}

/// Two-route diamond: S(0) -A(1)- E(3) and S(0) -B(2)- E(3), with the given
/// edge lengths in meters. Exit is node 3.
inline evacsim::NavGraph diamond_graph(double sa, double ae, double sb, double be) {
  std::vector<evacsim::NodeRecord> nodes = {
      {0, 0, 0, 0, false}, {1, 0, 1, 1, false}, {2, 0, 1, -1, false}, {3, 0, 2, 0, true}};
  std::vector<evacsim::EdgeRecord> edges = {{0, 1, sa, evacsim::EdgeKind::passage},
                                            {1, 3, ae, evacsim::EdgeKind::passage},
                                            {0, 2, sb, evacsim::EdgeKind::passage},
                                            {2, 3, be, evacsim::EdgeKind::passage}};
  return evacsim::NavGraph::make(std::move(nodes), std::move(edges));
}

/// Minimum typical-time route subject to stepwise worst-case budget
/// feasibility, by exhaustive simple-path enumeration. At each node of a
/// candidate path the next edge must satisfy
///   t_worst(edge) + W(next) <= deadline - (typical time spent so far).
/// Returns +inf when no simple path is feasible.
inline double oracle_route_time(const evacsim::NavGraph& g,
                                const evacsim::FieldSnapshot& snapshot,
                                const evacsim::WorstCaseDistances& wd, int start,
                                double deadline) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> visited(g.node_count(), false);
  auto dfs = [&](auto&& self, int node, double spent) -> void {
    if (node == g.exit_node()) {
      best = std::min(best, spent);
      return;
    }
    visited[node] = true;
    for (const evacsim::Neighbor& nb : g.neighbors(node)) {
      if (visited[nb.node]) continue;
      if (wd.t_worst[nb.edge] + wd.W[nb.node] > deadline - spent) continue;
      self(self, nb.node, spent + snapshot.t_typical[nb.edge]);
    }
    visited[node] = false;
  };
  dfs(dfs, start, 0.0);
  return best;
}

inline double mean(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Pearson lag-1 serial correlation of a series.
inline double lag1_correlation(const std::vector<double>& xs) {
  std::size_t n = xs.size() - 1;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += xs[i + 1];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (xs[i + 1] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (xs[i + 1] - my) * (xs[i + 1] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Splits one CSV line on commas (no quoting in our formats).
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

}  // namespace testsupport
