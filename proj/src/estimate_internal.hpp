#pragma once

// Shared internals of the estimation stack: timestamp-difference aggregation
// used both by pseudo-range extraction and by the joint solver.

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "tsloc/estimate.hpp"

namespace tsloc::detail {

struct RunningStats {
  int n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    double delta = x - mean;
    mean += delta / n;
    m2 += delta * (x - mean);
  }
  double sample_var() const { return n >= 2 ? m2 / (n - 1) : 0.0; }
};

/// Same-packet aggregation for one receiving target: per anchor transmitter,
/// statistics of c * (s_target[m] - s_ref[m]) in meters.
struct SamePacketAgg {
  NodeId ref_rx;
  std::map<NodeId, RunningStats> per_anchor;  // keyed by anchor transmitter
};

/// One aggregated double-difference group: statistics of c * dtdoa in meters
/// over packet pairs (tx_a, m), (tx_b, m') heard at receivers rx_k and rx_l.
/// The mean estimates d(b,k) - d(a,k) - d(b,l) + d(a,l).
struct DoubleDiffGroup {
  NodeId tx_a, tx_b, rx_k, rx_l;
  RunningStats stats;
};

struct DoubleDiffAgg {
  bool transmit_mode = false;  // target appears among the transmitters
  std::vector<DoubleDiffGroup> groups;
};

/// Enumerates close-in-time cross-transmitter packet pairs at the target and
/// differences them against every anchor receiver (receive mode), or pairs
/// the target's own packets with anchor transmissions heard by anchor
/// receiver pairs (transmit mode).
DoubleDiffAgg aggregate_double_differences(const std::vector<ReceptionRecord>& records,
                                           const std::set<NodeId>& known, const NodeId& target,
                                           const EstimatorConfig& config);

SamePacketAgg aggregate_same_packet(const std::vector<ReceptionRecord>& records,
                                    const std::set<NodeId>& known, const NodeId& target,
                                    const EstimatorConfig& config);

/// Inverse-variance weight of a group mean, with the young-group fallback:
/// groups too small to carry a variance borrow `pooled_var` per sample.
double group_weight(const RunningStats& stats, double pooled_var, double floor_var);

/// Pooled per-sample variance across groups (weighted by degrees of freedom).
template <typename It, typename Proj>
double pooled_sample_var(It begin, It end, Proj proj) {
  double ss = 0.0;
  long dof = 0;
  for (It it = begin; it != end; ++it) {
    const RunningStats& s = proj(*it);
    if (s.n >= 2) {
      ss += s.m2;
      dof += s.n - 1;
    }
  }
  return dof > 0 ? ss / static_cast<double>(dof) : 0.0;
}

}  // namespace tsloc::detail
