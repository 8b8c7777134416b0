#pragma once

// Path-loss link predicates: direct links from a single transmitter, and
// cooperative (CC) links where a sender and its helpers transmit the same
// packet and the receiver sums their SNRs. The channel gain is taken at its
// expected value (E|h|^2 = 1), so every predicate is deterministic.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "c3run/model.hpp"

namespace c3run {

/// A sender (`anchor`) together with the nodes relaying its packet.
/// `members` is sorted and always contains the anchor.
struct HelperSet {
  NodeId anchor = 0;
  std::vector<NodeId> members;

  bool contains(NodeId id) const { return std::binary_search(members.begin(), members.end(), id); }
};

inline HelperSet make_helper_set(NodeId anchor, std::vector<NodeId> members) {
  members.push_back(anchor);
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return {anchor, std::move(members)};
}

/// The threshold for which a direct link exists at exactly `range` meters.
inline double tau_from_range(double power, double noise, double alpha, double range) {
  if (!(power > 0.0) || !(noise > 0.0) || !(alpha > 0.0) || !(range > 0.0))
    throw std::invalid_argument("tau_from_range: all arguments must be positive");
  return power / (std::pow(range, alpha) * noise);
}

inline LinkParams params_for_range(double range, double power = 1.0, double noise = 1.0, double alpha = 2.0,
                                   double d_min = 0.1) {
  LinkParams p{alpha, noise, tau_from_range(power, noise, alpha, range), d_min};
  p.validate();
  return p;
}

inline double pairwise_snr(const UavNode& sender, const UavNode& receiver, const LinkParams& params) {
  const double d = std::max(distance(sender.pos, receiver.pos), params.d_min);
  return sender.power / (std::pow(d, params.alpha) * params.noise);
}

inline bool has_direct_link(const UavNode& sender, const UavNode& receiver, const LinkParams& params) {
  if (!sender.alive || !receiver.alive) throw std::invalid_argument("has_direct_link: node is not alive");
  return pairwise_snr(sender, receiver, params) >= params.tau;
}

inline double cc_snr(const HelperSet& senders, const UavNode& receiver, const NetworkState& state,
                     const LinkParams& params) {
  if (senders.contains(receiver.id)) throw std::invalid_argument("cc_snr: receiver is inside the sender set");
  double total = 0.0;
  for (NodeId m : senders.members) {
    const UavNode& s = state.node(m);
    if (!s.alive) throw std::invalid_argument("cc_snr: sender " + std::to_string(m) + " is not alive");
    total += pairwise_snr(s, receiver, params);
  }
  return total;
}

inline bool has_cc_link(const HelperSet& senders, const UavNode& receiver, const NetworkState& state,
                        const LinkParams& params) {
  return cc_snr(senders, receiver, state, params) >= params.tau;
}

namespace detail {
inline void require_disjoint(const HelperSet& i, const HelperSet& j) {
  for (NodeId m : i.members)
    if (j.contains(m)) throw std::invalid_argument("bidirectional_cc: helper sets overlap");
}
}  // namespace detail

/// The weaker of the two CC directions between the anchors of `i` and `j`.
inline double bidirectional_cc_snr(const HelperSet& i, const HelperSet& j, const NetworkState& state,
                                   const LinkParams& params) {
  detail::require_disjoint(i, j);
  return std::min(cc_snr(i, state.node(j.anchor), state, params), cc_snr(j, state.node(i.anchor), state, params));
}

inline bool bidirectional_cc(const HelperSet& i, const HelperSet& j, const NetworkState& state,
                             const LinkParams& params) {
  return bidirectional_cc_snr(i, j, state, params) >= params.tau;
}

}  // namespace c3run
