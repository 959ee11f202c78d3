#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <queue>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evacsim/errors.hpp"
#include "evacsim/rng.hpp"

namespace evacsim {

enum class EdgeKind { passage, stair };

inline std::string_view to_string(EdgeKind k) {
  return k == EdgeKind::passage ? "passage" : "stair";
}

struct NodeRecord {
  int id = 0;
  int deck = 0;
  double x = 0.0;  // meters, metadata only
  double y = 0.0;
  bool is_exit = false;
};

struct EdgeRecord {
  int a = 0;
  int b = 0;
  double length = 0.0;  // meters, > 0
  EdgeKind kind = EdgeKind::passage;
};

struct Neighbor {
  int node;  // neighbor id
  int edge;  // index into edges()
};

/// Multi-deck undirected navigation graph. Immutable once constructed;
/// construction validates every structural invariant (contiguous ids,
/// single exit, positive lengths, no duplicate edges, connectivity).
class NavGraph {
 public:
  static NavGraph make(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges) {
    if (nodes.empty()) throw ValidationError("graph has no nodes");
    const int n = static_cast<int>(nodes.size());

    std::vector<NodeRecord> ordered(n);
    std::vector<bool> seen(n, false);
    for (const auto& node : nodes) {
      if (node.id < 0 || node.id >= n)
        throw ValidationError("node id " + std::to_string(node.id) + " outside 0.." +
                              std::to_string(n - 1));
      if (seen[node.id]) throw ValidationError("duplicate node id " + std::to_string(node.id));
      seen[node.id] = true;
      ordered[node.id] = node;
    }

    int exit_node = -1;
    for (const auto& node : ordered) {
      if (!node.is_exit) continue;
      if (exit_node >= 0) throw ValidationError("multiple exit nodes");
      exit_node = node.id;
    }
    if (exit_node < 0) throw ValidationError("no exit node");

    std::set<std::pair<int, int>> pairs;
    for (const auto& e : edges) {
      if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n)
        throw ValidationError("edge endpoint outside node range");
      if (e.a == e.b) throw ValidationError("self-loop edge at node " + std::to_string(e.a));
      if (!(e.length > 0.0)) throw ValidationError("non-positive edge length");
      auto key = std::minmax(e.a, e.b);
      if (!pairs.insert(key).second)
        throw ValidationError("duplicate edge " + std::to_string(key.first) + "-" +
                              std::to_string(key.second));
    }

    NavGraph g;
    g.nodes_ = std::move(ordered);
    g.edges_ = std::move(edges);
    g.exit_node_ = exit_node;
    g.build_adjacency();
    g.check_connected();
    return g;
  }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int exit_node() const { return exit_node_; }

  const NodeRecord& node(int id) const { return nodes_.at(id); }
  const EdgeRecord& edge(int idx) const { return edges_.at(idx); }
  const std::vector<NodeRecord>& nodes() const { return nodes_; }
  const std::vector<EdgeRecord>& edges() const { return edges_; }

  /// Incident edges of `id`, sorted by neighbor id.
  std::span<const Neighbor> neighbors(int id) const {
    if (id < 0 || id >= node_count())
      throw ValidationError("unknown node id " + std::to_string(id));
    return {adjacency_.data() + offsets_[id],
            static_cast<std::size_t>(offsets_[id + 1] - offsets_[id])};
  }

  int degree(int id) const { return static_cast<int>(neighbors(id).size()); }

 private:
  NavGraph() = default;

  void build_adjacency() {
    const int n = node_count();
    std::vector<std::vector<Neighbor>> adj(n);
    for (int i = 0; i < edge_count(); ++i) {
      adj[edges_[i].a].push_back({edges_[i].b, i});
      adj[edges_[i].b].push_back({edges_[i].a, i});
    }
    offsets_.assign(n + 1, 0);
    adjacency_.clear();
    adjacency_.reserve(2 * edges_.size());
    for (int v = 0; v < n; ++v) {
      std::sort(adj[v].begin(), adj[v].end(),
                [](const Neighbor& l, const Neighbor& r) { return l.node < r.node; });
      offsets_[v + 1] = offsets_[v] + static_cast<int>(adj[v].size());
      adjacency_.insert(adjacency_.end(), adj[v].begin(), adj[v].end());
    }
  }

  void check_connected() const {
    std::vector<bool> reached(node_count(), false);
    std::queue<int> frontier;
    frontier.push(exit_node_);
    reached[exit_node_] = true;
    int count = 1;
    while (!frontier.empty()) {
      int v = frontier.front();
      frontier.pop();
      for (const Neighbor& nb : neighbors(v)) {
        if (reached[nb.node]) continue;
        reached[nb.node] = true;
        ++count;
        frontier.push(nb.node);
      }
    }
    if (count != node_count())
      throw ValidationError("disconnected graph: " + std::to_string(node_count() - count) +
                            " node(s) cannot reach the exit");
  }

  std::vector<NodeRecord> nodes_;
  std::vector<EdgeRecord> edges_;
  int exit_node_ = -1;
  std::vector<int> offsets_;
  std::vector<Neighbor> adjacency_;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline int parse_int(std::string_view s, int line_no, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(line_no, "expected integer for " + std::string(what) + ", got '" +
                                  std::string(s) + "'");
  return value;
}

inline double parse_double(std::string_view s, int line_no, std::string_view what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(line_no, "expected number for " + std::string(what) + ", got '" +
                                  std::string(s) + "'");
  return value;
}

inline void append_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace detail

/// Parses the line-oriented graph file format:
///   nodes <N>
///   exit <id>
///   node <id> <deck> <x> <y>          (N lines)
///   edge <a> <b> <length_m> <passage|stair>
/// '#' begins a comment line; blank lines are ignored.
inline NavGraph parse_graph(std::string_view text) {
  struct Line {
    int no;
    std::vector<std::string_view> fields;
  };
  std::vector<Line> lines;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    auto fields = detail::split_fields(raw);
    if (fields.empty() || fields[0].front() == '#') continue;
    lines.push_back({line_no, std::move(fields)});
  }

  std::size_t cursor = 0;
  auto next_line = [&]() -> const Line& {
    if (cursor >= lines.size()) throw ParseError(line_no, "unexpected end of file");
    return lines[cursor++];
  };

  const Line& header = next_line();
  if (header.fields[0] != "nodes" || header.fields.size() != 2)
    throw ParseError(header.no, "expected 'nodes <N>'");
  int n = detail::parse_int(header.fields[1], header.no, "node count");
  if (n <= 0) throw ParseError(header.no, "node count must be positive");

  const Line& exit_line = next_line();
  if (exit_line.fields[0] != "exit" || exit_line.fields.size() != 2)
    throw ParseError(exit_line.no, "expected 'exit <id>'");
  int exit_id = detail::parse_int(exit_line.fields[1], exit_line.no, "exit id");
  if (exit_id < 0 || exit_id >= n)
    throw ParseError(exit_line.no, "unknown exit node id " + std::to_string(exit_id));

  std::vector<NodeRecord> nodes;
  nodes.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Line& l = next_line();
    if (l.fields[0] != "node" || l.fields.size() != 5)
      throw ParseError(l.no, "expected 'node <id> <deck> <x> <y>'");
    NodeRecord rec;
    rec.id = detail::parse_int(l.fields[1], l.no, "node id");
    rec.deck = detail::parse_int(l.fields[2], l.no, "deck");
    rec.x = detail::parse_double(l.fields[3], l.no, "x");
    rec.y = detail::parse_double(l.fields[4], l.no, "y");
    rec.is_exit = rec.id == exit_id;
    nodes.push_back(rec);
  }

  std::vector<EdgeRecord> edges;
  while (cursor < lines.size()) {
    const Line& l = next_line();
    if (l.fields[0] != "edge" || l.fields.size() != 5)
      throw ParseError(l.no, "expected 'edge <a> <b> <length_m> <passage|stair>'");
    EdgeRecord rec;
    rec.a = detail::parse_int(l.fields[1], l.no, "edge endpoint");
    rec.b = detail::parse_int(l.fields[2], l.no, "edge endpoint");
    rec.length = detail::parse_double(l.fields[3], l.no, "edge length");
    if (l.fields[4] == "passage")
      rec.kind = EdgeKind::passage;
    else if (l.fields[4] == "stair")
      rec.kind = EdgeKind::stair;
    else
      throw ParseError(l.no, "unknown edge kind '" + std::string(l.fields[4]) + "'");
    edges.push_back(rec);
  }

  try {
    return NavGraph::make(std::move(nodes), std::move(edges));
  } catch (const ValidationError& e) {
    throw ParseError(0, e.what());
  }
}

/// Canonical text form: nodes ascending by id, edges sorted by normalized
/// endpoint pair. parse_graph(serialize_graph(g)) reproduces g structurally.
inline std::string serialize_graph(const NavGraph& g) {
  std::string out;
  out += "nodes " + std::to_string(g.node_count()) + "\n";
  out += "exit " + std::to_string(g.exit_node()) + "\n";
  for (const NodeRecord& node : g.nodes()) {
    out += "node " + std::to_string(node.id) + " " + std::to_string(node.deck) + " ";
    detail::append_double(out, node.x);
    out += " ";
    detail::append_double(out, node.y);
    out += "\n";
  }
  std::vector<EdgeRecord> edges = g.edges();
  for (EdgeRecord& e : edges)
    if (e.a > e.b) std::swap(e.a, e.b);
  std::sort(edges.begin(), edges.end(), [](const EdgeRecord& l, const EdgeRecord& r) {
    return std::pair(l.a, l.b) < std::pair(r.a, r.b);
  });
  for (const EdgeRecord& e : edges) {
    out += "edge " + std::to_string(e.a) + " " + std::to_string(e.b) + " ";
    detail::append_double(out, e.length);
    out += " ";
    out += to_string(e.kind);
    out += "\n";
  }
  return out;
}

/// Equality up to node/edge ordering and edge orientation.
inline bool structural_equal(const NavGraph& a, const NavGraph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  if (a.exit_node() != b.exit_node()) return false;
  for (int i = 0; i < a.node_count(); ++i) {
    const NodeRecord &l = a.node(i), &r = b.node(i);
    if (l.deck != r.deck || l.x != r.x || l.y != r.y || l.is_exit != r.is_exit) return false;
  }
  auto edge_map = [](const NavGraph& g) {
    std::map<std::pair<int, int>, std::pair<double, EdgeKind>> m;
    for (const EdgeRecord& e : g.edges())
      m[std::minmax(e.a, e.b)] = {e.length, e.kind};
    return m;
  };
  return edge_map(a) == edge_map(b);
}

/// Parameters for the synthetic multi-deck generator. Length intervals are
/// artifact parameters; node and segment counts come from the scenario.
struct SyntheticSpec {
  int decks = 3;
  int nodes_total = 346;
  int passage_edges = 600;
  int stair_edges = 5;
  double passage_len_min = 2.0;
  double passage_len_max = 15.0;
  double stair_len_min = 3.0;
  double stair_len_max = 6.0;
};

/// Builds a connected graph with exactly the requested node and edge counts.
/// Stairs connect consecutive decks, passages stay within a deck, and the
/// exit sits on the lowest deck. Deterministic for a fixed seed.
inline NavGraph generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  const int decks = spec.decks;
  const int n = spec.nodes_total;
  if (decks < 1) throw ConfigError("decks must be >= 1");
  if (n < decks) throw ConfigError("infeasible counts: need at least one node per deck");
  if (spec.stair_edges < decks - 1)
    throw ConfigError("infeasible counts: need at least decks-1 stair edges");
  if (decks == 1 && spec.stair_edges > 0)
    throw ConfigError("infeasible counts: stair edges require at least two decks");
  if (spec.passage_edges < 0 || spec.stair_edges < 0) throw ConfigError("negative edge count");
  if (spec.passage_edges + spec.stair_edges < n - 1)
    throw ConfigError("infeasible counts: too few edges to connect " + std::to_string(n) +
                      " nodes");
  if (!(spec.passage_len_min > 0) || spec.passage_len_max < spec.passage_len_min ||
      !(spec.stair_len_min > 0) || spec.stair_len_max < spec.stair_len_min)
    throw ConfigError("invalid length interval");

  // Deck sizes differ by at most one; deck 0 is the lowest.
  std::vector<int> deck_of(n);
  std::vector<std::vector<int>> deck_nodes(decks);
  for (int i = 0; i < n; ++i) {
    int d = static_cast<int>((static_cast<long long>(i) * decks) / n);
    deck_of[i] = d;
    deck_nodes[d].push_back(i);
  }

  // Capacity checks for distinct pairs.
  long long passage_cap = 0;
  for (int d = 0; d < decks; ++d) {
    long long s = static_cast<long long>(deck_nodes[d].size());
    passage_cap += s * (s - 1) / 2;
  }
  long long stair_cap = 0;
  for (int d = 0; d + 1 < decks; ++d)
    stair_cap += static_cast<long long>(deck_nodes[d].size()) * deck_nodes[d + 1].size();
  if (spec.passage_edges > passage_cap)
    throw ConfigError("infeasible counts: not enough distinct same-deck pairs");
  if (spec.stair_edges > stair_cap)
    throw ConfigError("infeasible counts: not enough distinct adjacent-deck pairs");

  Rng rng(mix64(seed));
  std::set<std::pair<int, int>> used;
  std::vector<EdgeRecord> edges;
  edges.reserve(spec.passage_edges + spec.stair_edges);
  int passages_left = spec.passage_edges;
  int stairs_left = spec.stair_edges;

  auto add_edge = [&](int a, int b, EdgeKind kind) {
    double length = kind == EdgeKind::passage
                        ? rng.uniform(spec.passage_len_min, spec.passage_len_max)
                        : rng.uniform(spec.stair_len_min, spec.stair_len_max);
    edges.push_back({a, b, length, kind});
    used.insert(std::minmax(a, b));
  };

  // Spanning trees per deck from passages, as far as the budget allows.
  // Remaining in-deck components get bridged through an adjacent deck with
  // extra stairs (possible whenever the preconditions hold).
  std::vector<int> component(n);
  for (int i = 0; i < n; ++i) component[i] = i;
  std::vector<int> comp_rank(n, 0);
  auto find = [&](int x) {
    while (component[x] != x) {
      component[x] = component[component[x]];
      x = component[x];
    }
    return x;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (comp_rank[a] < comp_rank[b]) std::swap(a, b);
    component[b] = a;
    if (comp_rank[a] == comp_rank[b]) ++comp_rank[a];
    return true;
  };

  for (int d = 0; d < decks; ++d) {
    const auto& members = deck_nodes[d];
    for (std::size_t i = 1; i < members.size() && passages_left > 0; ++i) {
      int prev = members[rng.uniform_int(static_cast<int>(i))];
      if (unite(prev, members[i])) {
        add_edge(prev, members[i], EdgeKind::passage);
        --passages_left;
      }
    }
  }

  // One stair per consecutive deck pair keeps decks mutually reachable.
  for (int d = 0; d + 1 < decks; ++d) {
    int a = deck_nodes[d][rng.uniform_int(static_cast<int>(deck_nodes[d].size()))];
    int b = deck_nodes[d + 1][rng.uniform_int(static_cast<int>(deck_nodes[d + 1].size()))];
    unite(a, b);
    add_edge(a, b, EdgeKind::stair);
    --stairs_left;
  }

  // Bridge any leftover components (passage budget below nodes-decks) via
  // stairs to an adjacent deck.
  for (int v = 0; v < n; ++v) {
    if (find(v) == find(0)) continue;
    int d = deck_of[v];
    for (int dir : {-1, +1}) {
      int od = d + dir;
      if (od < 0 || od >= decks) continue;
      const auto& pool = deck_nodes[od];
      int partner = -1;
      for (int attempt = 0; attempt < 4 * static_cast<int>(pool.size()); ++attempt) {
        int cand = pool[rng.uniform_int(static_cast<int>(pool.size()))];
        if (find(cand) != find(v) && !used.count(std::minmax(v, cand))) {
          partner = cand;
          break;
        }
      }
      if (partner >= 0 && stairs_left > 0) {
        unite(v, partner);
        add_edge(v, partner, EdgeKind::stair);
        --stairs_left;
        break;
      }
    }
  }
  for (int v = 0; v < n; ++v)
    if (find(v) != find(0)) throw ConfigError("infeasible counts: cannot connect all decks");

  // Fill the remaining budgets with random distinct pairs.
  auto fill = [&](int& budget, EdgeKind kind) {
    long long guard = 0;
    const long long guard_cap = 1000LL * (budget + 1) + 1000000LL;
    while (budget > 0) {
      if (++guard > guard_cap) throw ConfigError("infeasible counts: pair sampling exhausted");
      int a, b;
      if (kind == EdgeKind::passage) {
        int d = rng.uniform_int(decks);
        const auto& pool = deck_nodes[d];
        if (pool.size() < 2) continue;
        a = pool[rng.uniform_int(static_cast<int>(pool.size()))];
        b = pool[rng.uniform_int(static_cast<int>(pool.size()))];
      } else {
        int d = decks > 1 ? rng.uniform_int(decks - 1) : 0;
        a = deck_nodes[d][rng.uniform_int(static_cast<int>(deck_nodes[d].size()))];
        b = deck_nodes[d + 1][rng.uniform_int(static_cast<int>(deck_nodes[d + 1].size()))];
      }
      if (a == b || used.count(std::minmax(a, b))) continue;
      add_edge(a, b, kind);
      --budget;
    }
  };
  fill(passages_left, EdgeKind::passage);
  fill(stairs_left, EdgeKind::stair);

  int exit_id = deck_nodes[0][rng.uniform_int(static_cast<int>(deck_nodes[0].size()))];

  std::vector<NodeRecord> nodes(n);
  for (int i = 0; i < n; ++i) {
    nodes[i].id = i;
    nodes[i].deck = deck_of[i];
    nodes[i].x = rng.uniform(0.0, 120.0);
    nodes[i].y = rng.uniform(0.0, 30.0);
    nodes[i].is_exit = i == exit_id;
  }
  return NavGraph::make(std::move(nodes), std::move(edges));
}

}  // namespace evacsim
