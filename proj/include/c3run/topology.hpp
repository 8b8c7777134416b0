#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "c3run/channel.hpp"
#include "c3run/model.hpp"

namespace c3run {

using Edge = std::pair<NodeId, NodeId>;

inline Edge make_edge(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

/// Undirected graph over alive node ids. Vertices are sorted ascending and
/// each neighbor list is sorted ascending.
class AdjacencyGraph {
 public:
  AdjacencyGraph() = default;
  explicit AdjacencyGraph(std::vector<NodeId> vertices) : vertices_(std::move(vertices)) {
    std::sort(vertices_.begin(), vertices_.end());
    vertices_.erase(std::unique(vertices_.begin(), vertices_.end()), vertices_.end());
    adj_.resize(vertices_.size());
  }

  void add_edge(NodeId a, NodeId b) {
    if (a == b) return;
    auto& na = adj_[index_of(a)];
    auto& nb = adj_[index_of(b)];
    auto ia = std::lower_bound(na.begin(), na.end(), b);
    if (ia != na.end() && *ia == b) return;
    na.insert(ia, b);
    nb.insert(std::lower_bound(nb.begin(), nb.end(), a), a);
  }

  const std::vector<NodeId>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }

  bool has_vertex(NodeId id) const { return std::binary_search(vertices_.begin(), vertices_.end(), id); }

  const std::vector<NodeId>& neighbors(NodeId id) const { return adj_[index_of(id)]; }
  const std::vector<NodeId>& neighbors_at(std::size_t index) const { return adj_[index]; }

  bool has_edge(NodeId a, NodeId b) const {
    const auto& na = neighbors(a);
    return std::binary_search(na.begin(), na.end(), b);
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i < vertices_.size(); ++i)
      for (NodeId b : adj_[i])
        if (vertices_[i] < b) out.emplace_back(vertices_[i], b);
    return out;
  }

  std::size_t index_of(NodeId id) const {
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), id);
    if (it == vertices_.end() || *it != id) throw std::out_of_range("vertex " + std::to_string(id) + " not in graph");
    return static_cast<std::size_t>(it - vertices_.begin());
  }

 private:
  std::vector<NodeId> vertices_;
  std::vector<std::vector<NodeId>> adj_;
};

/// A connected component; `label` is its smallest member id.
struct Cluster {
  NodeId label = 0;
  std::vector<NodeId> members;

  bool contains(NodeId id) const { return std::binary_search(members.begin(), members.end(), id); }
};

/// Former neighbors of the failed node inside one cluster.
struct FrontierSet {
  NodeId cluster_label = 0;
  std::vector<NodeId> members;
};

inline AdjacencyGraph build_adjacency(const NetworkState& state, const LinkParams& params) {
  AdjacencyGraph g(state.alive_ids());
  const auto& ids = g.vertices();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const UavNode& a = state.node(ids[i]);
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const UavNode& b = state.node(ids[j]);
      if (has_direct_link(a, b, params) && has_direct_link(b, a, params)) g.add_edge(a.id, b.id);
    }
  }
  return g;
}

/// Components of `g` plus any `extra_edges` whose endpoints are both in `g`.
/// Ordered by label (smallest member id).
inline std::vector<Cluster> connected_components(const AdjacencyGraph& g, std::span<const Edge> extra_edges = {}) {
  const std::size_t n = g.size();
  std::vector<std::vector<std::size_t>> extra(n);
  for (const auto& [a, b] : extra_edges) {
    if (!g.has_vertex(a) || !g.has_vertex(b)) continue;
    const std::size_t ia = g.index_of(a), ib = g.index_of(b);
    extra[ia].push_back(ib);
    extra[ib].push_back(ia);
  }
  std::vector<int> comp(n, -1);
  std::vector<Cluster> out;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    const int c = static_cast<int>(out.size());
    out.push_back({g.vertices()[s], {}});
    comp[s] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      out.back().members.push_back(g.vertices()[u]);
      auto visit = [&](std::size_t v) {
        if (comp[v] < 0) {
          comp[v] = c;
          stack.push_back(v);
        }
      };
      for (NodeId w : g.neighbors_at(u)) visit(g.index_of(w));
      for (std::size_t v : extra[u]) visit(v);
    }
    std::sort(out.back().members.begin(), out.back().members.end());
  }
  return out;
}

inline bool is_connected(const AdjacencyGraph& g, std::span<const Edge> extra_edges = {}) {
  return connected_components(g, extra_edges).size() <= 1;
}

/// Cut vertices of `g` (Hopcroft-Tarjan low-link, iterative DFS).
inline std::vector<NodeId> articulation_points(const AdjacencyGraph& g) {
  const std::size_t n = g.size();
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> disc(n, kUnvisited), low(n, 0), parent(n, kUnvisited), next_edge(n, 0);
  std::vector<bool> is_cut(n, false);
  std::size_t timer = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] != kUnvisited) continue;
    std::size_t root_children = 0;
    std::vector<std::size_t> stack{root};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      const auto& nbrs = g.neighbors_at(u);
      if (next_edge[u] < nbrs.size()) {
        const std::size_t v = g.index_of(nbrs[next_edge[u]++]);
        if (disc[v] == kUnvisited) {
          parent[v] = u;
          disc[v] = low[v] = timer++;
          if (u == root) ++root_children;
          stack.push_back(v);
        } else if (v != parent[u]) {
          low[u] = std::min(low[u], disc[v]);
        }
        continue;
      }
      stack.pop_back();
      const std::size_t p = parent[u];
      if (p != kUnvisited) {
        low[p] = std::min(low[p], low[u]);
        if (p != root && low[u] >= disc[p]) is_cut[p] = true;
      }
    }
    if (root_children > 1) is_cut[root] = true;
  }

  std::vector<NodeId> out;
  for (std::size_t i = 0; i < n; ++i)
    if (is_cut[i]) out.push_back(g.vertices()[i]);
  return out;
}

/// `anchor` plus its current direct-link neighbors.
inline HelperSet helpers(const AdjacencyGraph& g, NodeId anchor) {
  if (!g.has_vertex(anchor))
    throw std::invalid_argument("helpers: anchor " + std::to_string(anchor) + " is not an alive node");
  return make_helper_set(anchor, g.neighbors(anchor));
}

/// For each post-failure cluster, the members that had a direct link to the
/// failed node at its last position. A cluster with no such member falls
/// back to its member nearest the failure position.
inline std::vector<FrontierSet> frontiers(const NetworkState& state, NodeId failed, std::span<const Cluster> clusters,
                                          const LinkParams& params) {
  if (!state.failed_pos()) throw std::invalid_argument("frontiers: failure position unknown");
  UavNode ghost = state.node(failed);
  ghost.alive = true;
  const Point at = *state.failed_pos();
  ghost.pos = at;

  std::vector<FrontierSet> out;
  for (const Cluster& c : clusters) {
    FrontierSet f{c.label, {}};
    for (NodeId m : c.members) {
      const UavNode& node = state.node(m);
      if (has_direct_link(node, ghost, params) && has_direct_link(ghost, node, params)) f.members.push_back(m);
    }
    if (f.members.empty()) {
      NodeId best = c.members.front();
      double best_d = distance(state.node(best).pos, at);
      for (NodeId m : c.members) {
        const double d = distance(state.node(m).pos, at);
        if (d < best_d) {
          best = m;
          best_d = d;
        }
      }
      f.members.push_back(best);
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace c3run
