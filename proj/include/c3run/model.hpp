#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace c3run {

using NodeId = std::uint32_t;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Moves `from` at most `step` meters along the straight line to `target`.
/// Never overshoots: when the target is within reach it is returned exactly.
inline Point step_toward(const Point& from, const Point& target, double step) {
  if (!(step >= 0.0)) throw std::invalid_argument("step_toward: step must be non-negative");
  const double d = distance(from, target);
  if (d <= step) return target;
  const double f = step / d;
  return {from.x + (target.x - from.x) * f, from.y + (target.y - from.y) * f};
}

struct UavNode {
  NodeId id = 0;
  Point pos;
  bool alive = true;
  double power = 1.0;
};

/// Radio constants for the path-loss link model. `d_min` clamps the
/// effective distance so co-located transmitters stay finite.
struct LinkParams {
  double alpha = 2.0;
  double noise = 1.0;
  double tau = 4.0e-4;
  double d_min = 0.1;

  void validate() const {
    if (!(alpha > 0.0) || !(noise > 0.0) || !(tau > 0.0) || !(d_min > 0.0))
      throw std::invalid_argument("LinkParams: alpha, noise, tau and d_min must be positive");
  }

  /// Distance at which a single transmitter of `power` exactly meets tau.
  double range(double power = 1.0) const { return std::pow(power / (tau * noise), 1.0 / alpha); }
};

/// The nodes of the network (sorted by id) and, once a failure has been
/// injected, the failed node and where it was.
class NetworkState {
 public:
  NetworkState() = default;
  explicit NetworkState(std::vector<UavNode> nodes) : nodes_(std::move(nodes)) {
    std::sort(nodes_.begin(), nodes_.end(), [](const UavNode& a, const UavNode& b) { return a.id < b.id; });
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
      if (nodes_[i].id == nodes_[i + 1].id)
        throw std::invalid_argument("NetworkState: duplicate node id " + std::to_string(nodes_[i].id));
    for (const auto& n : nodes_)
      if (!(n.power > 0.0)) throw std::invalid_argument("NetworkState: node power must be positive");
  }

  const std::vector<UavNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  bool contains(NodeId id) const { return find(id) != nullptr; }

  const UavNode& node(NodeId id) const {
    const UavNode* n = find(id);
    if (n == nullptr) throw std::out_of_range("unknown node id " + std::to_string(id));
    return *n;
  }
  UavNode& node(NodeId id) { return const_cast<UavNode&>(std::as_const(*this).node(id)); }

  void set_position(NodeId id, const Point& p) { node(id).pos = p; }

  std::vector<NodeId> alive_ids() const {
    std::vector<NodeId> out;
    for (const auto& n : nodes_)
      if (n.alive) out.push_back(n.id);
    return out;
  }

  /// Marks `id` dead and remembers its position.
  void fail(NodeId id) {
    UavNode& n = node(id);
    if (!n.alive) throw std::invalid_argument("node " + std::to_string(id) + " already failed");
    n.alive = false;
    failed_id_ = id;
    failed_pos_ = n.pos;
  }

  const std::optional<Point>& failed_pos() const { return failed_pos_; }
  const std::optional<NodeId>& failed_id() const { return failed_id_; }

  friend bool operator==(const NetworkState& a, const NetworkState& b) {
    if (a.nodes_.size() != b.nodes_.size() || a.failed_pos_ != b.failed_pos_ || a.failed_id_ != b.failed_id_)
      return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
      const auto& p = a.nodes_[i];
      const auto& q = b.nodes_[i];
      if (p.id != q.id || p.pos != q.pos || p.alive != q.alive || p.power != q.power) return false;
    }
    return true;
  }

 private:
  const UavNode* find(NodeId id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const UavNode& n, NodeId v) { return n.id < v; });
    return (it != nodes_.end() && it->id == id) ? &*it : nullptr;
  }

  std::vector<UavNode> nodes_;
  std::optional<Point> failed_pos_;
  std::optional<NodeId> failed_id_;
};

}  // namespace c3run
