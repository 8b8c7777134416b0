#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "c3run/recovery.hpp"
#include "c3run/simulator.hpp"
#include "support/fixtures.hpp"

namespace c3run {
namespace {

using testing::default_params;
using testing::make_state;

RecoveryLimits unit_limits() {
  RecoveryLimits l;
  l.speed = 1.0;
  l.tick = 1.0;
  return l;
}

RepairSide side(std::vector<NodeId> frontier, NodeId mover) {
  RepairSide s;
  s.frontier = std::move(frontier);
  s.mover = mover;
  return s;
}

TEST(AssessFailure, Examples) {
  const auto p = default_params();
  auto path = make_state({{0, 0}, {40, 0}, {80, 0}});
  auto a = assess_failure(path, 1, p);
  EXPECT_TRUE(a.is_cut_vertex);
  EXPECT_EQ(a.clusters.size(), 2u);
  EXPECT_FALSE(path.node(1).alive);
  EXPECT_EQ(*path.failed_pos(), (Point{40, 0}));

  auto tri = make_state({{0, 0}, {40, 0}, {20, 30}});
  auto t = assess_failure(tri, 2, p);
  EXPECT_FALSE(t.is_cut_vertex);
  EXPECT_EQ(t.clusters.size(), 1u);

  auto star = make_state({{0, 0}, {50, 0}, {-50, 0}, {0, 50}, {0, -50}});
  auto s = assess_failure(star, 0, p);
  ASSERT_EQ(s.clusters.size(), 4u);
  for (const auto& c : s.clusters) EXPECT_EQ(c.members.size(), 1u);

  EXPECT_THROW(assess_failure(star, 17, p), std::out_of_range);
  EXPECT_THROW(assess_failure(star, 0, p), std::logic_error);
}

TEST(StaticCcRepair, SymmetricSeventyMetrePair) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-35, 0}, {-36, 0}, {35, 0}, {36, 0}});
  st.fail(0);
  const std::vector<NodeId> fa{1}, fb{3};
  const auto bridge = static_cc_repair(st, fa, fb, p);
  ASSERT_TRUE(bridge.has_value());
  EXPECT_EQ(bridge->anchor_a, 1u);
  EXPECT_EQ(bridge->anchor_b, 3u);
  EXPECT_EQ(bridge->side_a.members, (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(bridge->side_b.members, (std::vector<NodeId>{3, 4}));
}

TEST(StaticCcRepair, SingletonsEightyMetresApartHaveNone) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-40, 0}, {40, 0}});
  st.fail(0);
  const std::vector<NodeId> fa{1}, fb{2};
  EXPECT_FALSE(static_cc_repair(st, fa, fb, p).has_value());
}

TEST(StaticCcRepair, DirectRangeCounts) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-20, 0}, {25, 0}});
  st.fail(0);
  const std::vector<NodeId> fa{1}, fb{2};
  EXPECT_TRUE(static_cc_repair(st, fa, fb, p).has_value());
}

TEST(StaticCcRepair, PicksLargestMargin) {
  // anchors 1 and 2 on side A; only 2 hears side B (3 and 4) well enough
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-45, 10}, {-30, 0}, {30, 0}, {31, 0}});
  st.fail(0);
  const std::vector<NodeId> fa{1, 2}, fb{3};
  const auto bridge = static_cc_repair(st, fa, fb, p);
  ASSERT_TRUE(bridge.has_value());
  EXPECT_EQ(bridge->anchor_a, 2u);
}

TEST(ChooseMover, LargestScoreWins) {
  const auto p = default_params();
  // opposite anchor 0 at the origin. A=1 with helper 2: 1/3600 + 1/4500 = 5e-4.
  // B=3 alone at sqrt(1/3e-4): 3e-4.
  const double hb = std::sqrt(4500.0), db = std::sqrt(1.0 / 3.0e-4);
  auto st = make_state({{0, 0}, {60, 0}, {hb, 0}, {0, -db}});
  const auto g = build_adjacency(st, p);
  const double score_a = cc_snr(helpers(g, 1), st.node(0), st, p);
  const double score_b = cc_snr(helpers(g, 3), st.node(0), st, p);
  EXPECT_NEAR(score_a, 5.0e-4, 1e-12);
  EXPECT_NEAR(score_b, 3.0e-4, 1e-12);
  const std::vector<NodeId> own{1, 3}, opposite{0};
  EXPECT_EQ(choose_mover(st, own, opposite, p), 1u);
}

TEST(ChooseMover, SingletonAndTies) {
  const auto p = default_params();
  std::vector<Point> pts(8);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {1000.0 + 200.0 * static_cast<double>(i), 1000.0};
  pts[0] = {0, 0};
  pts[3] = {60, 0};
  pts[7] = {-60, 0};
  auto st = testing::make_state(pts);
  const std::vector<NodeId> opposite{0};
  const std::vector<NodeId> tied{7, 3}, single{7}, none{};
  EXPECT_EQ(choose_mover(st, tied, opposite, p), 3u);
  EXPECT_EQ(choose_mover(st, single, opposite, p), 7u);
  EXPECT_THROW(choose_mover(st, none, opposite, p), std::invalid_argument);
}

TEST(MoverTick, BridgesOnTheTickCrossingTheBoundary) {
  const auto p = default_params();
  // side A: mover 1 at (-45,0) tethered to 2 at (-45,-20); side B: 3 at (30,0), 4 at (30,-20).
  auto st = make_state({{0, 0}, {-45, 0}, {-45, -20}, {30, 0}, {30, -20}});
  st.fail(0);

  // oracle: first t for which both CC directions clear tau with the mover at (-45+t, 0)
  auto both_ok = [&](int t) {
    const double dx = 30.0 - (-45.0 + t);
    const double ab = 1.0 / (dx * dx) + 1.0 / (75.0 * 75.0 + 400.0);
    const double ba = 1.0 / (dx * dx) + 1.0 / (dx * dx + 400.0);
    return std::min(ab, ba) >= p.tau;
  };
  int expected = 0;
  while (!both_ok(expected)) ++expected;
  ASSERT_EQ(expected, 10);

  RecoverySession session(st, p, unit_limits());
  RepairSide a = side({1}, 1), b = side({3}, 3);
  for (int t = 1; t < expected; ++t) EXPECT_EQ(session.mover_tick(a, b), MoveOutcome::Advanced) << t;
  EXPECT_EQ(session.mover_tick(a, b), MoveOutcome::Bridged);
  EXPECT_DOUBLE_EQ(session.state().node(1).pos.x, -45.0 + expected);
  EXPECT_DOUBLE_EQ(session.log().path_length(1), expected);
  EXPECT_EQ(session.bridges().size(), 1u);
}

TEST(MoverTick, BlockedWhenStepBreaksOnlyLink) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-45, 0}, {-95, 0}, {200, 0}});
  st.fail(0);
  RecoverySession session(st, p, unit_limits());
  RepairSide a = side({1}, 1), b = side({3}, 3);
  EXPECT_EQ(session.mover_tick(a, b), MoveOutcome::Blocked);
  EXPECT_EQ(session.state().node(1).pos, (Point{-45, 0}));
  EXPECT_EQ(session.log().total_distance(), 0.0);
}

TEST(MoverTick, AlreadyBridgedDoesNotMove) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-35, 0}, {-36, 0}, {35, 0}, {36, 0}});
  st.fail(0);
  RecoverySession session(st, p, unit_limits());
  RepairSide a = side({1}, 1), b = side({3}, 3);
  EXPECT_EQ(session.mover_tick(a, b), MoveOutcome::Bridged);
  EXPECT_EQ(session.log().total_distance(), 0.0);
}

TEST(MoverTick, AtFailurePositionIsBlocked) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {0, 0}, {500, 0}});
  st.fail(0);
  RecoverySession session(st, p, unit_limits());
  RepairSide a = side({1}, 1), b = side({2}, 2);
  EXPECT_EQ(session.mover_tick(a, b), MoveOutcome::Blocked);
}

TEST(HelperPhaseTick, HelperGainsEightMetres) {
  const auto p = default_params();
  // mover 1 (-36,0) with helper 2 five metres behind; opposite 3 (36,0) with 4,5 at (36,+-2)
  auto st = make_state({{0, 0}, {-36, 0}, {-41, 0}, {36, 0}, {36, 2}, {36, -2}});
  st.fail(0);

  // oracle: B->A is fixed, A->B grows as the helper at (-41+t,0) closes in
  const double ba = 1.0 / (72.0 * 72.0) + 2.0 / (72.0 * 72.0 + 4.0);
  ASSERT_GE(ba, p.tau);
  int expected = 0;
  for (;; ++expected) {
    const double dh = 77.0 - expected;
    if (1.0 / (72.0 * 72.0) + 1.0 / (dh * dh) >= p.tau) break;
  }
  ASSERT_EQ(expected, 8);

  RecoverySession session(st, p, unit_limits());
  RepairSide a = side({1}, 1), b = side({3}, 3);
  for (int t = 1; t < expected; ++t) EXPECT_EQ(session.helper_phase_tick(a, b), MoveOutcome::Advanced) << t;
  EXPECT_EQ(session.helper_phase_tick(a, b), MoveOutcome::Bridged);
  EXPECT_DOUBLE_EQ(session.state().node(2).pos.x, -41.0 + expected);
  EXPECT_EQ(session.log().path_length(1), 0.0);
}

TEST(HelperPhaseTick, HelperRetiresAtMoverRange) {
  const auto p = default_params();
  // helper 2 is 48 m from mover 1 and walks away from it toward the origin
  auto st = make_state({{0, 0}, {-60, 0}, {-12, 0}, {300, 0}});
  st.fail(0);
  RecoverySession session(st, p, unit_limits());
  RepairSide a = side({1}, 1), b = side({3}, 3);
  EXPECT_EQ(session.helper_phase_tick(a, b), MoveOutcome::Advanced);
  EXPECT_EQ(session.helper_phase_tick(a, b), MoveOutcome::Advanced);
  EXPECT_EQ(session.helper_phase_tick(a, b), MoveOutcome::Blocked);
  EXPECT_EQ(session.state().node(2).pos, (Point{-10, 0}));
}

TEST(HelperPhaseTick, NoHelpersIsBlocked) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-60, 0}, {300, 0}});
  st.fail(0);
  RecoverySession session(st, p, unit_limits());
  RepairSide a = side({1}, 1), b = side({2}, 2);
  EXPECT_EQ(session.helper_phase_tick(a, b), MoveOutcome::Blocked);
  EXPECT_EQ(session.log().total_distance(), 0.0);
}

TEST(BlockPhaseTick, RigidTranslationOfWholeCluster) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-35, 0}, {-45, 0}, {-55, 0}, {45, 0}});
  st.fail(0);

  // oracle: B is a lone node, so the B->A direction is a direct link from 4 to 1
  int expected = 0;
  for (;; ++expected) {
    const double d1 = 80.0 - expected, d2 = 90.0 - expected, d3 = 100.0 - expected;
    const double ab = 1.0 / (d1 * d1) + 1.0 / (d2 * d2) + 1.0 / (d3 * d3);
    const double ba = 1.0 / (d1 * d1);
    if (std::min(ab, ba) >= p.tau) break;
  }
  ASSERT_EQ(expected, 30);

  RecoverySession session(st, p, unit_limits());
  RepairSide a = side({1}, 1), b = side({4}, 4);
  for (int t = 1; t < expected; ++t) EXPECT_EQ(session.block_phase_tick(a, b), MoveOutcome::Advanced) << t;
  EXPECT_EQ(session.block_phase_tick(a, b), MoveOutcome::Bridged);
  for (NodeId id : {1u, 2u, 3u}) EXPECT_DOUBLE_EQ(session.log().path_length(id), expected);
  EXPECT_EQ(session.log().path_length(4), 0.0);
}

TEST(BlockPhaseTick, AbsorbsTetheringNeighbor) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-40, 0}, {-80, 0}, {-130, 0}, {-170, 0}, {400, 0}});
  st.fail(0);
  RecoverySession session(st, p, unit_limits());
  RepairSide a = side({1}, 1), b = side({5}, 5);
  EXPECT_EQ(session.block_phase_tick(a, b), MoveOutcome::Advanced);
  EXPECT_EQ(a.block, (std::vector<NodeId>{1, 2, 3}));
  EXPECT_EQ(session.state().node(3).pos, (Point{-129, 0}));
  EXPECT_EQ(session.state().node(4).pos, (Point{-170, 0}));
  EXPECT_EQ(session.log().nodes_moved(), 3u);
}

TEST(BlockPhaseTick, AlreadyBridged) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-35, 0}, {-36, 0}, {35, 0}, {36, 0}});
  st.fail(0);
  RecoverySession session(st, p, unit_limits());
  RepairSide a = side({1}, 1), b = side({3}, 3);
  EXPECT_EQ(session.block_phase_tick(a, b), MoveOutcome::Bridged);
  EXPECT_EQ(session.log().total_distance(), 0.0);
}

TEST(RunRecovery, StaticRepairCostsNothing) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-35, 0}, {-36, 0}, {35, 0}, {36, 0}});
  assess_failure(st, 0, p);
  const auto r = run_recovery(st, p, unit_limits());
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.nodes_moved, 0u);
  EXPECT_EQ(r.total_distance, 0.0);
  EXPECT_EQ(r.recovery_ticks, 0u);
  EXPECT_EQ(r.bridges.size(), 1u);
}

TEST(RunRecovery, NonCutFailureIsFree) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {40, 0}, {20, 30}});
  assess_failure(st, 2, p);
  const auto r = run_recovery(st, p, unit_limits());
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.nodes_moved, 0u);
  EXPECT_EQ(r.recovery_ticks, 0u);
}

TEST(RunRecovery, TwoSingletonsTwoHundredMetresApart) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-100, 0}, {100, 0}});
  assess_failure(st, 0, p);

  // tick oracle: both step 1 m per tick, side A first; joined at direct range
  double xa = -100.0, xb = 100.0, dist = 0.0;
  std::uint64_t ticks = 0;
  for (;;) {
    if (xb - xa <= 50.0) break;
    ++ticks;
    xa += 1.0;
    dist += 1.0;
    if (xb - xa <= 50.0) break;
    xb -= 1.0;
    dist += 1.0;
  }
  ASSERT_EQ(ticks, 75u);
  ASSERT_EQ(dist, 150.0);

  const auto r = run_recovery(st, p, unit_limits());
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.recovery_ticks, ticks);
  EXPECT_DOUBLE_EQ(r.total_distance, dist);
  EXPECT_EQ(r.nodes_moved, 2u);
  EXPECT_EQ(r.invariant_violations, 0u);
}

TEST(RunRecovery, DetectionDelayIsCharged) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-100, 0}, {100, 0}});
  assess_failure(st, 0, p);
  auto limits = unit_limits();
  limits.detection_delay = 5;
  EXPECT_EQ(run_recovery(st, p, limits).recovery_ticks, 80u);
}

TEST(RunRecovery, TickLimitFails) {
  const auto p = default_params();
  auto st = make_state({{0, 0}, {-100, 0}, {100, 0}});
  assess_failure(st, 0, p);
  auto limits = unit_limits();
  limits.max_ticks = 10;
  const auto r = run_recovery(st, p, limits);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.recovery_ticks, 10u);
}

TEST(RunRecovery, RequiresInjectedFailure) {
  auto st = make_state({{0, 0}, {10, 0}});
  EXPECT_THROW(run_recovery(st, default_params(), unit_limits()), std::invalid_argument);
}

// Random scenarios: invariants, success and metric consistency against the trace.
class RecoveryProperties : public ::testing::TestWithParam<std::size_t> {};

TEST_P(RecoveryProperties, HoldOnSeededScenarios) {
  ScenarioSpec spec;
  spec.n_nodes = GetParam();
  spec.params = default_params();
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const Scenario sc = make_scenario(spec, seed * 7919 + spec.n_nodes);
    NetworkState final_state = sc.initial;
    const auto r = simulate(sc, Algorithm::C3run, true, &final_state);
    SCOPED_TRACE(::testing::Message() << "n=" << spec.n_nodes << " seed=" << seed);
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.invariant_violations, 0u);

    // replay the trace from the initial positions
    std::map<NodeId, Point> pos;
    for (const auto& n : sc.initial.nodes()) pos[n.id] = n.pos;
    std::map<NodeId, double> length;
    for (const auto& rec : r.trace) {
      EXPECT_FALSE(rec.moves.empty());
      for (const auto& m : rec.moves) {
        length[m.id] += distance(pos[m.id], m.to);
        pos[m.id] = m.to;
      }
    }
    double total = 0.0;
    std::size_t moved = 0;
    for (const auto& [id, len] : length) {
      total += len;
      if (len > 0.0) ++moved;
    }
    EXPECT_NEAR(r.total_distance, total, 1e-9 * (1.0 + total));
    EXPECT_EQ(r.nodes_moved, moved);
    EXPECT_EQ(r.recovery_ticks, r.trace.size());
    for (const auto& [id, at] : pos) EXPECT_EQ(final_state.node(id).pos, at);

    // the final network is connected through direct links plus the bridges that still hold
    const auto g = build_adjacency(final_state, sc.params);
    std::vector<Edge> live;
    for (const auto& b : r.bridges) {
      const auto ha = helpers(g, b.anchor_a), hb = helpers(g, b.anchor_b);
      bool overlap = false;
      for (NodeId m : ha.members) overlap = overlap || hb.contains(m);
      if (overlap || bidirectional_cc(ha, hb, final_state, sc.params)) live.push_back(make_edge(b.anchor_a, b.anchor_b));
    }
    EXPECT_TRUE(is_connected(g, live));
  }
}

INSTANTIATE_TEST_SUITE_P(Densities, RecoveryProperties, ::testing::Values(20u, 35u, 50u));

}  // namespace
}  // namespace c3run
