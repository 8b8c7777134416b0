#pragma once

// Comparison algorithms sharing the recovery tick engine and metrics:
//   RIM           former neighbors converge on the failure position; nodes
//                 that lose a link to a moved node follow it (cascade).
//   LeDiR         the smallest cluster is pulled in; its member nearest the
//                 failure position goes there and the rest follow a frozen
//                 shortest-path tree.
//   Coop bridges  static CC bridges only, no movement.
// RIM and LeDiR rely on direct links only.

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <vector>

#include "c3run/channel.hpp"
#include "c3run/model.hpp"
#include "c3run/recovery.hpp"
#include "c3run/topology.hpp"

namespace c3run {

namespace detail {

// Slack that lands an approaching node strictly inside its stop radius.
inline constexpr double kArrivalTolerance = 1e-9;

inline bool linked(const UavNode& a, const UavNode& b, const LinkParams& params) {
  return has_direct_link(a, b, params) && has_direct_link(b, a, params);
}

/// Steps from `from` toward `to` by at most `step`, stopping once within
/// `keep` meters of `to`. Returns nullopt when already within `keep`.
inline std::optional<Point> approach(const Point& from, const Point& to, double step, double keep) {
  const double d = distance(from, to);
  if (d <= keep) return std::nullopt;
  return step_toward(from, to, std::min(step, d - keep + kArrivalTolerance));
}

/// Link range between two nodes (the weaker transmitter decides).
inline double pair_range(const UavNode& a, const UavNode& b, const LinkParams& params) {
  return std::min(params.range(a.power), params.range(b.power));
}

/// Applies simultaneous moves and keeps the shared metrics.
class MovementRecorder {
 public:
  MovementRecorder(NetworkState& state, const RecoveryLimits& limits, std::string phase)
      : state_(state), limits_(limits), phase_(std::move(phase)) {}

  void commit(const std::vector<NodeMove>& moves) {
    if (moves.empty()) return;
    for (const NodeMove& m : moves) {
      log_.record(m.id, distance(state_.node(m.id).pos, m.to));
      state_.set_position(m.id, m.to);
    }
    log_.tick();
    if (limits_.record_trace) trace_.push_back({log_.ticks(), phase_, moves});
  }

  void charge_idle_ticks(std::uint64_t n) { log_.tick(n); }
  bool tick_limit_reached() const { return log_.ticks() >= limits_.max_ticks; }

  RecoveryReport report(bool success) const {
    RecoveryReport r;
    r.success = success;
    r.nodes_moved = log_.nodes_moved();
    r.total_distance = log_.total_distance();
    r.recovery_ticks = log_.ticks();
    r.trace = trace_;
    return r;
  }

 private:
  NetworkState& state_;
  RecoveryLimits limits_;
  std::string phase_;
  MoveLog log_;
  std::vector<TraceRecord> trace_;
};

/// Alive nodes that had a direct link to the failed node at its last position.
inline std::vector<NodeId> former_neighbors(const NetworkState& state, const LinkParams& params) {
  UavNode ghost = state.node(*state.failed_id());
  ghost.alive = true;
  ghost.pos = *state.failed_pos();
  std::vector<NodeId> out;
  for (const UavNode& n : state.nodes())
    if (n.alive && linked(n, ghost, params)) out.push_back(n.id);
  return out;
}

}  // namespace detail

inline RecoveryReport run_rim(NetworkState& state, const LinkParams& params, const RecoveryLimits& limits) {
  params.validate();
  limits.validate();
  const FailureAssessment assessment = assessment_of(state, params);
  detail::MovementRecorder rec(state, limits, "rim");
  if (assessment.is_cut_vertex) rec.charge_idle_ticks(limits.detection_delay);

  const Point target = *state.failed_pos();
  const AdjacencyGraph original = build_adjacency(state, params);
  const std::vector<NodeId> leaders = detail::former_neighbors(state, params);
  std::map<NodeId, NodeId> parent_of;  // follower -> node it follows
  std::vector<NodeId> moving(leaders);
  std::sort(moving.begin(), moving.end());
  auto is_moving = [&](NodeId id) { return std::binary_search(moving.begin(), moving.end(), id); };
  auto is_leader = [&](NodeId id) { return std::binary_search(leaders.begin(), leaders.end(), id); };

  for (;;) {
    if (rec.tick_limit_reached()) return rec.report(false);
    std::vector<NodeMove> moves;
    for (NodeId id : moving) {
      const UavNode& n = state.node(id);
      std::optional<Point> next;
      if (is_leader(id)) {
        next = detail::approach(n.pos, target, limits.step(), 0.5 * params.range(n.power));
      } else {
        const UavNode& p = state.node(parent_of.at(id));
        if (!detail::linked(n, p, params))
          next = detail::approach(n.pos, p.pos, limits.step(), detail::pair_range(n, p, params));
      }
      if (next) moves.push_back({id, *next});
    }
    rec.commit(moves);

    // Nodes that lost a link to a moving node start following it.
    bool recruited = false;
    for (NodeId u : std::vector<NodeId>(moving)) {
      for (NodeId v : original.neighbors(u)) {
        if (is_moving(v) || detail::linked(state.node(u), state.node(v), params)) continue;
        parent_of[v] = u;
        moving.insert(std::lower_bound(moving.begin(), moving.end(), v), v);
        recruited = true;
      }
    }
    if (moves.empty() && !recruited) break;
  }
  return rec.report(is_connected(build_adjacency(state, params)));
}

inline RecoveryReport run_ledir(NetworkState& state, const LinkParams& params, const RecoveryLimits& limits) {
  params.validate();
  limits.validate();
  const FailureAssessment assessment = assessment_of(state, params);
  detail::MovementRecorder rec(state, limits, "ledir");
  if (!assessment.is_cut_vertex) return rec.report(true);
  rec.charge_idle_ticks(limits.detection_delay);

  const Point target = *state.failed_pos();
  const Cluster& small = *std::min_element(
      assessment.clusters.begin(), assessment.clusters.end(), [](const Cluster& a, const Cluster& b) {
        return a.members.size() != b.members.size() ? a.members.size() < b.members.size() : a.label < b.label;
      });

  NodeId lead = small.members.front();
  for (NodeId m : small.members)
    if (distance(state.node(m).pos, target) < distance(state.node(lead).pos, target)) lead = m;

  // Hop-count shortest-path tree rooted at the lead, frozen now.
  const AdjacencyGraph g = build_adjacency(state, params);
  std::map<NodeId, NodeId> parent_of;
  std::queue<NodeId> frontier;
  frontier.push(lead);
  parent_of[lead] = lead;
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop();
    for (NodeId v : g.neighbors(u))
      if (parent_of.emplace(v, u).second) frontier.push(v);
  }

  for (;;) {
    if (rec.tick_limit_reached()) return rec.report(false);
    std::vector<NodeMove> moves;
    for (NodeId id : small.members) {
      const UavNode& n = state.node(id);
      if (id == lead) {
        if (n.pos != target) moves.push_back({id, step_toward(n.pos, target, limits.step())});
        continue;
      }
      const UavNode& p = state.node(parent_of.at(id));
      if (detail::linked(n, p, params)) continue;
      if (auto next = detail::approach(n.pos, p.pos, limits.step(), detail::pair_range(n, p, params)))
        moves.push_back({id, *next});
    }
    if (moves.empty()) break;
    rec.commit(moves);
  }
  return rec.report(is_connected(build_adjacency(state, params)));
}

inline RecoveryReport run_coop_bridges(NetworkState& state, const LinkParams& params, const RecoveryLimits& limits) {
  params.validate();
  limits.validate();
  const FailureAssessment assessment = assessment_of(state, params);
  RecoveryReport report;
  if (!assessment.is_cut_vertex) {
    report.success = true;
    return report;
  }
  const AdjacencyGraph g = build_adjacency(state, params);
  const auto& fs = assessment.frontiers;
  std::vector<Edge> bridge_edges;
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = i + 1; j < fs.size(); ++j)
      if (auto bridge = static_cc_repair(state, g, fs[i].members, fs[j].members, params)) {
        bridge_edges.push_back(make_edge(bridge->anchor_a, bridge->anchor_b));
        report.bridges.push_back(std::move(*bridge));
      }
  report.success = is_connected(g, bridge_edges);
  return report;
}

}  // namespace c3run
