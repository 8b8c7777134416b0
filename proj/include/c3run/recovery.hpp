#pragma once

// C3RUN connectivity recovery.
//
// After a cut-vertex fails, the surviving clusters are reconnected pairwise:
//   1. static CC: frontier anchors try bidirectional CC links using their
//      current neighbors as helpers;
//   2. mover advance: each side's best-scoring frontier node steps toward
//      the failure position until a bridge appears or the step would split
//      its own component;
//   3. helper advance: the mover's helpers step in one at a time while they
//      stay in direct range of the mover;
//   4. static CC retry, then block advance: a block seeded with the mover's
//      helper set steps toward the failure position, absorbing one adjacent
//      node whenever the step would split the component.
// Every movement is a hypothetical step that commits only if no current
// component (direct links plus live CC bridges) splits.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "c3run/channel.hpp"
#include "c3run/model.hpp"
#include "c3run/topology.hpp"

namespace c3run {

enum class RecoveryPhase { Idle, StaticCC, MoverAdvance, HelperAdvance, StaticCCRetry, BlockAdvance, Done, Failed };

inline std::string_view to_string(RecoveryPhase p) {
  switch (p) {
    case RecoveryPhase::Idle: return "idle";
    case RecoveryPhase::StaticCC: return "static_cc";
    case RecoveryPhase::MoverAdvance: return "mover_advance";
    case RecoveryPhase::HelperAdvance: return "helper_advance";
    case RecoveryPhase::StaticCCRetry: return "static_cc_retry";
    case RecoveryPhase::BlockAdvance: return "block_advance";
    case RecoveryPhase::Done: return "done";
    case RecoveryPhase::Failed: return "failed";
  }
  return "unknown";
}

enum class MoveOutcome { Advanced, Blocked, Bridged };

/// A bidirectional CC link between two anchors, each backed by its helpers.
struct CCBridge {
  HelperSet side_a;
  HelperSet side_b;
  NodeId anchor_a = 0;
  NodeId anchor_b = 0;
};

/// Per-node cumulative path length and the committed tick count.
class MoveLog {
 public:
  void record(NodeId id, double length) {
    if (length < 0.0) throw std::invalid_argument("MoveLog: negative step length");
    lengths_[id] += length;
  }
  void tick(std::uint64_t n = 1) { ticks_ += n; }

  double path_length(NodeId id) const {
    auto it = lengths_.find(id);
    return it == lengths_.end() ? 0.0 : it->second;
  }
  bool moved(NodeId id) const { return path_length(id) > 0.0; }
  std::uint64_t ticks() const { return ticks_; }

  std::size_t nodes_moved() const {
    return static_cast<std::size_t>(
        std::count_if(lengths_.begin(), lengths_.end(), [](const auto& kv) { return kv.second > 0.0; }));
  }
  double total_distance() const {
    double sum = 0.0;
    for (const auto& [id, len] : lengths_) sum += len;
    return sum;
  }
  const std::map<NodeId, double>& lengths() const { return lengths_; }

 private:
  std::map<NodeId, double> lengths_;
  std::uint64_t ticks_ = 0;
};

struct NodeMove {
  NodeId id = 0;
  Point to;
};

struct TraceRecord {
  std::uint64_t tick = 0;
  std::string phase;
  std::vector<NodeMove> moves;
};

struct RecoveryLimits {
  double speed = 1.0;  // m/s
  double tick = 1.0;   // s
  std::uint64_t max_ticks = 10'000;
  std::uint64_t detection_delay = 0;  // idle ticks charged before recovery starts
  bool check_invariants = true;
  bool record_trace = false;

  double step() const { return speed * tick; }

  void validate() const {
    if (!(speed > 0.0)) throw std::invalid_argument("speed must be positive");
    if (!(tick > 0.0)) throw std::invalid_argument("tick must be positive");
    if (max_ticks == 0) throw std::invalid_argument("max_ticks must be positive");
  }
};

struct RecoveryReport {
  bool success = false;
  std::size_t nodes_moved = 0;
  double total_distance = 0.0;
  std::uint64_t recovery_ticks = 0;
  std::vector<CCBridge> bridges;
  std::vector<TraceRecord> trace;
  std::size_t invariant_violations = 0;
};

struct FailureAssessment {
  bool is_cut_vertex = false;
  std::vector<Cluster> clusters;
  std::vector<FrontierSet> frontiers;
};

/// Clusters and frontiers of a state whose failure has already been injected.
inline FailureAssessment assessment_of(const NetworkState& state, const LinkParams& params) {
  if (!state.failed_id()) throw std::invalid_argument("no failure has been injected");
  FailureAssessment out;
  out.clusters = connected_components(build_adjacency(state, params));
  out.frontiers = frontiers(state, *state.failed_id(), out.clusters, params);
  out.is_cut_vertex = out.clusters.size() > 1;
  return out;
}

inline FailureAssessment assess_failure(NetworkState& state, NodeId failed, const LinkParams& params) {
  if (!state.contains(failed)) throw std::out_of_range("assess_failure: unknown node id " + std::to_string(failed));
  state.fail(failed);
  return assessment_of(state, params);
}

/// Best bidirectional CC bridge between any anchor of `side_a` and any anchor
/// of `side_b`, each helped by its current neighbors in `g`. When the two
/// helper sets overlap the anchors are neighbors, and the pair is judged on
/// the direct link alone.
inline std::optional<CCBridge> static_cc_repair(const NetworkState& state, const AdjacencyGraph& g,
                                                std::span<const NodeId> side_a, std::span<const NodeId> side_b,
                                                const LinkParams& params) {
  std::vector<NodeId> fa(side_a.begin(), side_a.end()), fb(side_b.begin(), side_b.end());
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  std::optional<CCBridge> best;
  double best_margin = 0.0;
  for (NodeId a : fa) {
    if (!g.has_vertex(a)) continue;
    const HelperSet ha = helpers(g, a);
    for (NodeId b : fb) {
      if (a == b || !g.has_vertex(b)) continue;
      HelperSet hb = helpers(g, b);
      HelperSet ha_used = ha;
      if (std::any_of(ha.members.begin(), ha.members.end(), [&](NodeId m) { return hb.contains(m); })) {
        ha_used = make_helper_set(a, {});
        hb = make_helper_set(b, {});
      }
      const double margin = bidirectional_cc_snr(ha_used, hb, state, params);
      if (margin >= params.tau && (!best || margin > best_margin)) {
        best = CCBridge{ha_used, hb, a, b};
        best_margin = margin;
      }
    }
  }
  return best;
}

inline std::optional<CCBridge> static_cc_repair(const NetworkState& state, std::span<const NodeId> side_a,
                                                std::span<const NodeId> side_b, const LinkParams& params) {
  return static_cc_repair(state, build_adjacency(state, params), side_a, side_b, params);
}

/// The node of `own` whose helper set delivers the largest summed CC SNR to
/// the nodes of `opposite`; ties go to the lowest id.
inline NodeId choose_mover(const NetworkState& state, std::span<const NodeId> own, std::span<const NodeId> opposite,
                           const LinkParams& params) {
  if (own.empty()) throw std::invalid_argument("choose_mover: empty frontier");
  const AdjacencyGraph g = build_adjacency(state, params);
  std::optional<NodeId> best;
  double best_score = 0.0;
  for (NodeId i : own) {
    const HelperSet hs = helpers(g, i);
    double score = 0.0;
    for (NodeId j : opposite)
      if (!hs.contains(j)) score += cc_snr(hs, state.node(j), state, params);
    if (!best || score > best_score || (score == best_score && i < *best)) {
      best = i;
      best_score = score;
    }
  }
  return *best;
}

/// One side of a pairwise repair round.
struct RepairSide {
  std::vector<NodeId> frontier;
  NodeId mover = 0;

  std::vector<NodeId> helper_queue;
  std::size_t active_helper = 0;
  bool helpers_initialized = false;

  std::vector<NodeId> block;
};

/// Owns the mutable state of one recovery run: positions, move log,
/// established bridges and the optional per-tick trace.
class RecoverySession {
 public:
  RecoverySession(NetworkState& state, const LinkParams& params, const RecoveryLimits& limits)
      : state_(state), params_(params), limits_(limits) {
    params_.validate();
    limits_.validate();
    if (!state_.failed_pos()) throw std::invalid_argument("RecoverySession: no failure has been injected");
  }

  const NetworkState& state() const { return state_; }
  const MoveLog& log() const { return log_; }
  const std::vector<CCBridge>& bridges() const { return bridges_; }
  std::size_t invariant_violations() const { return violations_; }
  RecoveryPhase phase() const { return phase_; }
  void set_phase(RecoveryPhase p) { phase_ = p; }
  bool tick_limit_reached() const { return log_.ticks() >= limits_.max_ticks; }

  AdjacencyGraph graph() const { return build_adjacency(state_, params_); }

  /// Established bridges that still hold at the current positions.
  std::vector<Edge> live_bridge_edges(const AdjacencyGraph& g) const {
    std::vector<Edge> out;
    for (const CCBridge& b : bridges_) {
      if (!g.has_vertex(b.anchor_a) || !g.has_vertex(b.anchor_b)) continue;
      const HelperSet ha = helpers(g, b.anchor_a);
      const HelperSet hb = helpers(g, b.anchor_b);
      const bool overlap =
          std::any_of(ha.members.begin(), ha.members.end(), [&](NodeId m) { return hb.contains(m); });
      if (overlap || bidirectional_cc(ha, hb, state_, params_)) out.push_back(make_edge(b.anchor_a, b.anchor_b));
    }
    return out;
  }

  std::vector<Cluster> components() const {
    const AdjacencyGraph g = graph();
    const auto extra = live_bridge_edges(g);
    return connected_components(g, extra);
  }

  void add_bridge(CCBridge b) { bridges_.push_back(std::move(b)); }

  /// Applies `moves` if no current component splits; otherwise leaves the
  /// state untouched and returns false.
  bool try_move(std::span<const NodeMove> moves) {
    if (moves.empty()) return false;
    const auto before = components();
    std::vector<NodeMove> undo;
    for (const NodeMove& m : moves) {
      undo.push_back({m.id, state_.node(m.id).pos});
      state_.set_position(m.id, m.to);
    }
    if (!refines(before, components())) {
      for (const NodeMove& u : undo) state_.set_position(u.id, u.to);
      return false;
    }
    for (std::size_t i = 0; i < moves.size(); ++i) {
      log_.record(moves[i].id, distance(undo[i].to, moves[i].to));
      pending_.push_back(moves[i]);
    }
    return true;
  }

  void begin_tick() {
    pending_.clear();
    if (limits_.check_invariants) tick_start_components_ = components();
  }

  /// Counts the tick if anything moved. Returns whether it was committed.
  bool end_tick() {
    if (pending_.empty()) return false;
    log_.tick();
    if (limits_.check_invariants && !refines(tick_start_components_, components())) ++violations_;
    if (limits_.record_trace) trace_.push_back({log_.ticks(), std::string(to_string(phase_)), pending_});
    pending_.clear();
    return true;
  }

  void charge_idle_ticks(std::uint64_t n) { log_.tick(n); }

  bool same_component(NodeId a, NodeId b) const {
    for (const Cluster& c : components())
      if (c.contains(a)) return c.contains(b);
    return false;
  }

  /// True when the two sides are already joined, or a static CC bridge
  /// between their frontiers can be established now (it is then recorded).
  bool bridged(const RepairSide& a, const RepairSide& b) {
    if (same_component(a.frontier.front(), b.frontier.front())) return true;
    if (auto bridge = static_cc_repair(state_, graph(), a.frontier, b.frontier, params_)) {
      add_bridge(std::move(*bridge));
      return true;
    }
    return false;
  }

  MoveOutcome mover_tick(RepairSide& self, const RepairSide& other) {
    if (bridged(self, other)) return MoveOutcome::Bridged;
    const Point target = *state_.failed_pos();
    const Point at = state_.node(self.mover).pos;
    if (at == target) return MoveOutcome::Blocked;
    const NodeMove m{self.mover, step_toward(at, target, limits_.step())};
    if (!try_move({&m, 1})) return MoveOutcome::Blocked;
    return bridged(self, other) ? MoveOutcome::Bridged : MoveOutcome::Advanced;
  }

  MoveOutcome helper_phase_tick(RepairSide& self, const RepairSide& other) {
    if (bridged(self, other)) return MoveOutcome::Bridged;
    if (!self.helpers_initialized) init_helper_queue(self, other);
    const Point target = *state_.failed_pos();
    while (self.active_helper < self.helper_queue.size()) {
      UavNode helper = state_.node(self.helper_queue[self.active_helper]);
      const UavNode& mover = state_.node(self.mover);
      if (helper.pos == target) {
        ++self.active_helper;
        continue;
      }
      helper.pos = step_toward(helper.pos, target, limits_.step());
      const bool tethered = has_direct_link(helper, mover, params_) && has_direct_link(mover, helper, params_);
      const NodeMove m{helper.id, helper.pos};
      if (!tethered || !try_move({&m, 1})) {
        ++self.active_helper;
        continue;
      }
      return bridged(self, other) ? MoveOutcome::Bridged : MoveOutcome::Advanced;
    }
    return MoveOutcome::Blocked;
  }

  MoveOutcome block_phase_tick(RepairSide& self, const RepairSide& other) {
    if (bridged(self, other)) return MoveOutcome::Bridged;
    if (self.block.empty()) self.block = helpers(graph(), self.mover).members;
    const Point target = *state_.failed_pos();
    for (;;) {
      std::vector<NodeMove> moves;
      for (NodeId id : self.block) {
        const Point at = state_.node(id).pos;
        if (at != target) moves.push_back({id, step_toward(at, target, limits_.step())});
      }
      if (moves.empty()) return MoveOutcome::Blocked;
      if (try_move(moves)) return bridged(self, other) ? MoveOutcome::Bridged : MoveOutcome::Advanced;
      if (!grow_block(self)) return MoveOutcome::Blocked;
    }
  }

  /// Runs the static-retry and movement phases for one pair of components
  /// until they are joined. Returns false if the tick limit is reached or
  /// neither side can make progress.
  bool repair_pair(RepairSide& a, RepairSide& b) {
    phase_ = RecoveryPhase::StaticCC;
    if (bridged(a, b)) return true;

    a.mover = choose_mover(state_, a.frontier, b.frontier, params_);
    b.mover = choose_mover(state_, b.frontier, a.frontier, params_);

    phase_ = RecoveryPhase::MoverAdvance;
    switch (run_ticks(a, b, [this](RepairSide& s, const RepairSide& o) { return mover_tick(s, o); })) {
      case MoveOutcome::Bridged: return true;
      case MoveOutcome::Advanced: return false;
      case MoveOutcome::Blocked: break;
    }

    phase_ = RecoveryPhase::HelperAdvance;
    switch (run_ticks(a, b, [this](RepairSide& s, const RepairSide& o) { return helper_phase_tick(s, o); })) {
      case MoveOutcome::Bridged: return true;
      case MoveOutcome::Advanced: return false;
      case MoveOutcome::Blocked: break;
    }

    phase_ = RecoveryPhase::StaticCCRetry;
    if (bridged(a, b)) return true;

    phase_ = RecoveryPhase::BlockAdvance;
    return run_ticks(a, b, [this](RepairSide& s, const RepairSide& o) { return block_phase_tick(s, o); }) ==
           MoveOutcome::Bridged;
  }

  RecoveryReport report(bool success) const {
    RecoveryReport r;
    r.success = success;
    r.nodes_moved = log_.nodes_moved();
    r.total_distance = log_.total_distance();
    r.recovery_ticks = log_.ticks();
    r.bridges = bridges_;
    r.trace = trace_;
    r.invariant_violations = violations_;
    return r;
  }

 private:
  // Every component of `before` lies inside a single component of `after`.
  static bool refines(const std::vector<Cluster>& before, const std::vector<Cluster>& after) {
    for (const Cluster& c : before) {
      auto home = std::find_if(after.begin(), after.end(), [&](const Cluster& a) { return a.contains(c.label); });
      if (home == after.end()) return false;
      for (NodeId m : c.members)
        if (!home->contains(m)) return false;
    }
    return true;
  }

  void init_helper_queue(RepairSide& self, const RepairSide& other) {
    const HelperSet hs = helpers(graph(), self.mover);
    const UavNode& opposite = state_.node(other.mover);
    std::vector<std::pair<double, NodeId>> ranked;
    for (NodeId h : hs.members)
      if (h != self.mover) ranked.emplace_back(pairwise_snr(state_.node(h), opposite, params_), h);
    std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    self.helper_queue.clear();
    for (const auto& [snr, id] : ranked) self.helper_queue.push_back(id);
    self.active_helper = 0;
    self.helpers_initialized = true;
  }

  // Adds the component node adjacent to the block that is nearest the
  // failure position. Returns false once the block covers the component.
  bool grow_block(RepairSide& self) {
    const AdjacencyGraph g = graph();
    const auto extra = live_bridge_edges(g);
    const auto comps = connected_components(g, extra);
    const auto home =
        std::find_if(comps.begin(), comps.end(), [&](const Cluster& c) { return c.contains(self.mover); });
    std::sort(self.block.begin(), self.block.end());
    auto in_block = [&](NodeId id) { return std::binary_search(self.block.begin(), self.block.end(), id); };

    std::vector<NodeId> candidates;
    for (NodeId m : self.block) {
      for (NodeId n : g.neighbors(m))
        if (!in_block(n)) candidates.push_back(n);
      for (const auto& [x, y] : extra) {
        if (x == m && !in_block(y)) candidates.push_back(y);
        if (y == m && !in_block(x)) candidates.push_back(x);
      }
    }
    if (candidates.empty() && home != comps.end())
      for (NodeId m : home->members)
        if (!in_block(m)) candidates.push_back(m);
    if (candidates.empty()) return false;

    const Point target = *state_.failed_pos();
    NodeId best = candidates.front();
    double best_d = distance(state_.node(best).pos, target);
    for (NodeId c : candidates) {
      const double d = distance(state_.node(c).pos, target);
      if (d < best_d || (d == best_d && c < best)) {
        best = c;
        best_d = d;
      }
    }
    self.block.insert(std::lower_bound(self.block.begin(), self.block.end(), best), best);
    return true;
  }

  // Both sides act each tick, side `a` first. Returns Bridged when joined,
  // Blocked once neither side can move, Advanced when the tick limit stops it.
  template <class Step>
  MoveOutcome run_ticks(RepairSide& a, RepairSide& b, Step step) {
    for (;;) {
      if (tick_limit_reached()) return MoveOutcome::Advanced;
      begin_tick();
      const MoveOutcome oa = step(a, b);
      if (oa == MoveOutcome::Bridged) {
        end_tick();
        return MoveOutcome::Bridged;
      }
      const MoveOutcome ob = step(b, a);
      end_tick();
      if (ob == MoveOutcome::Bridged) return MoveOutcome::Bridged;
      if (oa == MoveOutcome::Blocked && ob == MoveOutcome::Blocked) return MoveOutcome::Blocked;
    }
  }

  NetworkState& state_;
  LinkParams params_;
  RecoveryLimits limits_;
  MoveLog log_;
  std::vector<CCBridge> bridges_;
  std::vector<TraceRecord> trace_;
  std::vector<NodeMove> pending_;
  std::vector<Cluster> tick_start_components_;
  std::size_t violations_ = 0;
  RecoveryPhase phase_ = RecoveryPhase::Idle;
};

/// Anchor candidates of every current component: the failure-time frontier
/// members it contains, or its member nearest the failure position.
inline std::vector<std::vector<NodeId>> component_frontiers(const NetworkState& state,
                                                            std::span<const Cluster> components,
                                                            std::span<const FrontierSet> initial) {
  std::vector<std::vector<NodeId>> out;
  const Point at = *state.failed_pos();
  for (const Cluster& c : components) {
    std::vector<NodeId> f;
    for (const FrontierSet& fs : initial)
      for (NodeId m : fs.members)
        if (c.contains(m)) f.push_back(m);
    if (f.empty()) {
      NodeId best = c.members.front();
      for (NodeId m : c.members)
        if (distance(state.node(m).pos, at) < distance(state.node(best).pos, at)) best = m;
      f.push_back(best);
    }
    std::sort(f.begin(), f.end());
    out.push_back(std::move(f));
  }
  return out;
}

/// Full C3RUN run on a state whose failure has already been injected.
inline RecoveryReport run_recovery(NetworkState& state, const LinkParams& params, const RecoveryLimits& limits) {
  const FailureAssessment assessment = assessment_of(state, params);
  RecoverySession session(state, params, limits);
  if (!assessment.is_cut_vertex) {
    session.set_phase(RecoveryPhase::Done);
    return session.report(true);
  }
  session.charge_idle_ticks(limits.detection_delay);

  // Static CC between every pair of clusters before anything moves.
  session.set_phase(RecoveryPhase::StaticCC);
  {
    const AdjacencyGraph g = session.graph();
    const auto& fs = assessment.frontiers;
    for (std::size_t i = 0; i < fs.size(); ++i)
      for (std::size_t j = i + 1; j < fs.size(); ++j) {
        if (session.same_component(fs[i].members.front(), fs[j].members.front())) continue;
        if (auto bridge = static_cc_repair(state, g, fs[i].members, fs[j].members, params))
          session.add_bridge(std::move(*bridge));
      }
  }

  for (;;) {
    const auto comps = session.components();
    if (comps.size() <= 1) break;
    if (session.tick_limit_reached()) {
      session.set_phase(RecoveryPhase::Failed);
      return session.report(false);
    }
    const auto fronts = component_frontiers(state, comps, assessment.frontiers);

    // Nearest pair of frontier anchors; ties keep the smaller labels.
    std::size_t best_x = 0, best_y = 1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < comps.size(); ++x)
      for (std::size_t y = x + 1; y < comps.size(); ++y)
        for (NodeId a : fronts[x])
          for (NodeId b : fronts[y]) {
            const double d = distance(state.node(a).pos, state.node(b).pos);
            if (d < best_d) {
              best_d = d;
              best_x = x;
              best_y = y;
            }
          }

    RepairSide a;
    RepairSide b;
    a.frontier = fronts[best_x];
    b.frontier = fronts[best_y];
    if (!session.repair_pair(a, b)) {
      session.set_phase(RecoveryPhase::Failed);
      return session.report(false);
    }
  }
  session.set_phase(RecoveryPhase::Done);
  return session.report(true);
}

}  // namespace c3run
