#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "c3run/baselines.hpp"
#include "c3run/channel.hpp"
#include "c3run/model.hpp"
#include "c3run/recovery.hpp"
#include "c3run/rng.hpp"
#include "c3run/topology.hpp"

namespace c3run {

enum class Algorithm { C3run, Rim, Ledir, CoopBridges };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::C3run: return "c3run";
    case Algorithm::Rim: return "rim";
    case Algorithm::Ledir: return "ledir";
    case Algorithm::CoopBridges: return "ccbridges";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::C3run, Algorithm::Rim, Algorithm::Ledir, Algorithm::CoopBridges})
    if (to_string(a) == name) return a;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline bool linked_at(const Point& a, const Point& b, const LinkParams& params) {
  const UavNode x{0, a, true, 1.0}, y{1, b, true, 1.0};
  return has_direct_link(x, y, params) && has_direct_link(y, x, params);
}

// Connectivity of a dense boolean adjacency matrix (row-major, n x n).
inline bool connected_matrix(const std::vector<char>& adj, std::size_t n) {
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n; ++v)
      if (adj[u * n + v] && !seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
  }
  return count == n;
}

}  // namespace detail

struct PlacementOptions {
  std::size_t max_draws = 10'000;    // per node while seeding
  std::size_t max_restarts = 100;    // whole-placement restarts while seeding
  std::size_t mixing_sweeps = 100;   // relocation proposals per node
};

/// `n` unit-power nodes distributed uniformly over [0, area]^2 conditioned
/// on a connected direct-link graph.
///
/// A connected seed placement is grown one node at a time (each node drawn
/// uniformly until it links to an earlier one). It is then mixed by
/// Metropolis relocation: a random node is proposed a fresh uniform
/// position, accepted iff the graph stays connected. The proposal is
/// symmetric and the target is flat on the connected set, so the chain's
/// stationary law is exactly the conditioned uniform placement.
inline NetworkState generate_connected_topology(std::size_t n, double area, const LinkParams& params, Rng& rng,
                                                const PlacementOptions& opts = {}) {
  if (n < 2) throw std::invalid_argument("generate_connected_topology: need at least 2 nodes");
  if (!(area > 0.0)) throw std::invalid_argument("generate_connected_topology: area must be positive");
  params.validate();
  auto draw = [&] { return Point{rng.uniform(0.0, area), rng.uniform(0.0, area)}; };

  std::vector<Point> pos;
  for (std::size_t attempt = 0; attempt < opts.max_restarts && pos.size() < n; ++attempt) {
    pos.clear();
    bool stuck = false;
    while (pos.size() < n && !stuck) {
      std::size_t draws = 0;
      for (;;) {
        if (draws++ == opts.max_draws) {
          stuck = true;
          break;
        }
        const Point p = draw();
        if (pos.empty() ||
            std::any_of(pos.begin(), pos.end(), [&](const Point& q) { return detail::linked_at(p, q, params); })) {
          pos.push_back(p);
          break;
        }
      }
    }
  }
  if (pos.size() < n)
    throw GenerationError("could not place " + std::to_string(n) + " connected nodes in a " +
                          std::to_string(area) + " m square");

  std::vector<char> adj(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) adj[i * n + j] = i != j && detail::linked_at(pos[i], pos[j], params);
  std::vector<char> saved(n);
  for (std::size_t k = 0; k < opts.mixing_sweeps * n; ++k) {
    const std::size_t i = rng.below(n);
    const Point old = pos[i];
    const Point cand = draw();
    for (std::size_t j = 0; j < n; ++j) {
      saved[j] = adj[i * n + j];
      adj[i * n + j] = adj[j * n + i] = i != j && detail::linked_at(cand, pos[j], params);
    }
    if (detail::connected_matrix(adj, n)) {
      pos[i] = cand;
    } else {
      for (std::size_t j = 0; j < n; ++j) adj[i * n + j] = adj[j * n + i] = saved[j];
      pos[i] = old;
    }
  }

  std::vector<UavNode> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back({static_cast<NodeId>(i), pos[i], true, 1.0});
  return NetworkState(std::move(nodes));
}

/// A uniformly chosen articulation point, or nullopt when the graph is
/// 2-connected and the topology should be regenerated.
inline std::optional<NodeId> select_failure(const NetworkState& state, const LinkParams& params, Rng& rng) {
  const auto cuts = articulation_points(build_adjacency(state, params));
  if (cuts.empty()) return std::nullopt;
  return cuts[rng.below(cuts.size())];
}

struct Scenario {
  NetworkState initial;
  NodeId failed = 0;
  LinkParams params;
  double speed = 1.0;
  double tick = 1.0;
  std::uint64_t max_ticks = 10'000;
  std::uint64_t detection_delay = 0;
  std::uint64_t seed = 0;

  RecoveryLimits limits(bool record_trace = false) const {
    RecoveryLimits l;
    l.speed = speed;
    l.tick = tick;
    l.max_ticks = max_ticks;
    l.detection_delay = detection_delay;
    l.record_trace = record_trace;
    return l;
  }
};

struct ScenarioSpec {
  std::size_t n_nodes = 20;
  double area = 300.0;
  LinkParams params;
  double speed = 1.0;
  double tick = 1.0;
  std::uint64_t max_ticks = 10'000;
  std::uint64_t detection_delay = 0;
  std::size_t max_regenerations = 10'000;
};

/// A connected topology with a cut-vertex failure, drawn from `seed`.
inline Scenario make_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = 0; i < spec.max_regenerations; ++i) {
    NetworkState state = generate_connected_topology(spec.n_nodes, spec.area, spec.params, rng);
    if (auto failed = select_failure(state, spec.params, rng))
      return {std::move(state), *failed, spec.params, spec.speed,
              spec.tick,        spec.max_ticks, spec.detection_delay, seed};
  }
  throw GenerationError("no topology with a cut vertex after " + std::to_string(spec.max_regenerations) +
                        " regenerations");
}

inline RecoveryReport run_algorithm(Algorithm algo, NetworkState& state, const LinkParams& params,
                                    const RecoveryLimits& limits) {
  switch (algo) {
    case Algorithm::C3run: return run_recovery(state, params, limits);
    case Algorithm::Rim: return run_rim(state, params, limits);
    case Algorithm::Ledir: return run_ledir(state, params, limits);
    case Algorithm::CoopBridges: return run_coop_bridges(state, params, limits);
  }
  throw std::invalid_argument("unknown algorithm");
}

/// Injects the scenario's failure into a copy of its state and runs `algo`.
inline RecoveryReport simulate(const Scenario& scenario, Algorithm algo, bool record_trace = false,
                               NetworkState* final_state = nullptr) {
  NetworkState state = scenario.initial;
  assess_failure(state, scenario.failed, scenario.params);
  RecoveryReport r = run_algorithm(algo, state, scenario.params, scenario.limits(record_trace));
  if (final_state != nullptr) *final_state = std::move(state);
  return r;
}

inline RecoveryReport simulate(const Scenario& scenario, std::string_view algo, bool record_trace = false) {
  return simulate(scenario, parse_algorithm(algo), record_trace);
}

}  // namespace c3run
