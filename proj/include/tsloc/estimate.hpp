#pragma once

#include <Eigen/Core>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tsloc/simulate.hpp"
#include "tsloc/types.hpp"

namespace tsloc {

// Differencing schemes over reception timestamps. With receiver clocks
// s = a + (1+b) r + h(r) + w and r = t + d/c:
//
//   SameReceiver     s_k[m'] - s_k[m]   (two transmitters, one receiver)
//                    cancels the receiver bias a_k, and h_k for packets
//                    close in time; transmission times remain.
//   SamePacket       s_k[m] - s_l[m]    (one packet, two receivers)
//                    cancels the transmission time; receiver biases remain.
//   DoubleDifference (s_k[m'] - s_k[m]) - (s_l[m'] - s_l[m])
//                    cancels both receiver biases and transmission times.
enum class DiffKind { SameReceiver, SamePacket, DoubleDifference };

enum class Refinement { Sequential, Joint };

struct DifferenceObservation {
  DiffKind kind = DiffKind::SameReceiver;
  NodeId tx_i;  // transmitter of the first packet
  NodeId tx_j;  // transmitter of the second packet (SameReceiver / DoubleDifference)
  NodeId rx_k;  // first receiver
  NodeId rx_l;  // second receiver (SamePacket / DoubleDifference)
  int m_i = -1;
  int m_j = -1;
  double value_s = 0.0;
};

DifferenceObservation diff_same_receiver(const ReceptionRecord& rec_a,
                                         const ReceptionRecord& rec_b);
DifferenceObservation diff_same_packet(const ReceptionRecord& rec_k,
                                       const ReceptionRecord& rec_l);

/// Double difference over transmitters {i, j} and receivers {k, l}:
/// rec_ik / rec_il carry packet (i, m) at k and l, rec_jk / rec_jl packet
/// (j, m'). Value: (s_k[m'] - s_k[m]) - (s_l[m'] - s_l[m]), which under
/// drift-free clocks equals (d_jk - d_ik - d_jl + d_il)/c.
DifferenceObservation dtdoa(const ReceptionRecord& rec_ik, const ReceptionRecord& rec_jk,
                            const ReceptionRecord& rec_il, const ReceptionRecord& rec_jl);

/// Clock rate of rx relative to a reference receiver, estimated as the slope
/// of the least-squares line through (s_ref[tx,m], s_rx[tx,m]) over packets
/// heard by both. relative_drift = slope - 1 = (1+b_rx)/(1+b_ref) - 1.
struct DriftEstimate {
  NodeId rx;
  double relative_drift = 0.0;
  NodeId reference;
};

DriftEstimate estimate_drift(const std::vector<ReceptionRecord>& records, const NodeId& rx,
                             const NodeId& reference);

/// Drift estimates for every receiver against a common reference (the
/// receiver with the most receptions; its own drift is 0 by convention).
std::unordered_map<NodeId, DriftEstimate> estimate_all_drifts(
    const std::vector<ReceptionRecord>& records);

/// Rescales timestamps to the reference rate: s / (1 + relative_drift).
std::vector<ReceptionRecord> correct_drift(
    const std::vector<ReceptionRecord>& records,
    const std::unordered_map<NodeId, DriftEstimate>& drifts);

struct PseudoRangeEntry {
  NodeId anchor;
  double pseudo_range_m = 0.0;
  double weight = 1.0;
};

/// Distances from a target to a set of anchors, valid only up to one additive
/// bias shared by all entries: entries[i] - entries[j] estimates
/// d(target, anchor_i) - d(target, anchor_j).
struct PseudoRangeSet {
  NodeId target;
  std::vector<PseudoRangeEntry> entries;
};

struct EstimatorConfig {
  DiffKind scheme = DiffKind::DoubleDifference;
  Refinement refinement = Refinement::Sequential;
  // Packets from different transmitters pair up only when their arrivals at
  // the pairing receiver are closer than this; close pairs also cancel the
  // slowly-varying clock component.
  double pairing_window_s = 0.1;
  bool outlier_rejection = true;
  double outlier_threshold = 3.0;  // in robust standard deviations
  int max_iterations = 50;
  double step_tol_m = 1e-6;
  // Variance floor for inverse-variance weights (zero-variance degeneracy).
  double weight_floor_var_m2 = 1e-12;
  double condition_limit = 1e12;
  double c = kSpeedOfLight;
};

/// Stage one of the pipeline: reduce drift-corrected timestamps to one
/// pseudo-range per anchor.
///
/// SamePacket uses a single reference receiver chosen among the anchors (the
/// one sharing the most packets with the target); per anchor transmitter a,
/// c*(s_target - s_ref) + d(a, ref) averaged over packets estimates
/// d(a, target) plus the common bias c*(a_target - a_ref).
///
/// DoubleDifference aggregates quads between anchor transmitters, which
/// resolves pairwise range differences with no bias bookkeeping; per-anchor
/// values are then reconciled with a small least-squares pass over the
/// difference graph. SameReceiver pairs reduce to the same quads once the
/// shared transmission-time nuisance is differenced out across receivers, so
/// that scheme shares this path.
///
/// A target that never receives but does transmit is located from its own
/// packets heard by pairs of anchor receivers (DoubleDifference only; the
/// SamePacket form leaves per-receiver biases that do not share).
PseudoRangeSet extract_pseudoranges(const std::vector<ReceptionRecord>& records,
                                    const std::vector<NoisyPrior>& anchors, const NodeId& target,
                                    DiffKind scheme, const EstimatorConfig& config = {});

struct PositionEstimate {
  NodeId node;
  Eigen::VectorXd pos;
  double common_bias_m = 0.0;
  int iterations = 0;
  double residual_rms_m = 0.0;
  bool converged = false;
  std::vector<NodeId> excluded_anchors;
};

/// Gauss-Newton least squares over (position, common bias):
/// residual_e = pseudo_range_e - (||pos - anchor_e|| + bias), weighted by the
/// entry weights, with step halving when the residual RMS increases. Stops
/// when the step norm drops below step_tol_m or after max_iterations.
PositionEstimate ils_solve(const PseudoRangeSet& prs,
                           const std::map<NodeId, Eigen::VectorXd>& anchor_positions,
                           const Eigen::VectorXd& init, const EstimatorConfig& config = {});

/// Data-driven exclusion of NLOS-suspect entries: solve, standardize
/// residuals against their median/MAD, drop the worst entry whose residual
/// exceeds the threshold on the positive side (NLOS only ever lengthens a
/// pseudo-range), re-solve. Stops when all entries pass or only d+2 remain.
std::pair<PseudoRangeSet, std::vector<NodeId>> reject_outliers(
    const PseudoRangeSet& prs, const std::map<NodeId, Eigen::VectorXd>& anchor_positions,
    const Eigen::VectorXd& init, const EstimatorConfig& config = {});

/// Non-fixed nodes ordered most-connected first, blind nodes after helpers.
std::vector<NodeId> default_refinement_order(const std::vector<ReceptionRecord>& records,
                                             const std::vector<NoisyPrior>& priors);

/// Locates the nodes in `order` one at a time, feeding each new estimate back
/// as an anchor for the nodes after it. Fixed stations anchor exactly;
/// not-yet-refined helpers anchor at their GNSS prior.
std::map<NodeId, PositionEstimate> refine_sequential(const std::vector<ReceptionRecord>& records,
                                                     const std::vector<NoisyPrior>& priors,
                                                     const std::vector<NodeId>& order,
                                                     const EstimatorConfig& config = {});

/// Solves all unknown positions in one stacked Gauss-Newton problem, with
/// quadratic prior terms anchoring each GNSS node to its reported position
/// weighted by 1/sigma0^2.
std::map<NodeId, PositionEstimate> refine_joint(const std::vector<ReceptionRecord>& records,
                                                const std::vector<NoisyPrior>& priors,
                                                const EstimatorConfig& config = {});

}  // namespace tsloc
