#pragma once

#include <initializer_list>
#include <utility>
#include <vector>

#include "c3run/channel.hpp"
#include "c3run/model.hpp"

namespace c3run::testing {

inline LinkParams default_params() { return params_for_range(50.0); }

/// Unit-power alive nodes with ids 0..n-1 at the given coordinates.
inline NetworkState make_state(std::initializer_list<std::pair<double, double>> coords) {
  std::vector<UavNode> nodes;
  NodeId id = 0;
  for (const auto& [x, y] : coords) nodes.push_back({id++, {x, y}, true, 1.0});
  return NetworkState(std::move(nodes));
}

inline NetworkState make_state(const std::vector<Point>& coords) {
  std::vector<UavNode> nodes;
  NodeId id = 0;
  for (const Point& p : coords) nodes.push_back({id++, p, true, 1.0});
  return NetworkState(std::move(nodes));
}

}  // namespace c3run::testing
