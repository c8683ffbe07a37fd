#include <algorithm>
#include <map>

#include "tsloc/estimate.hpp"

namespace tsloc {

DifferenceObservation diff_same_receiver(const ReceptionRecord& rec_a,
                                         const ReceptionRecord& rec_b) {
  if (rec_a.rx != rec_b.rx) {
    throw Error(Errc::MismatchedReceiver, "same-receiver difference needs one receiver, got '" +
                                              rec_a.rx.value + "' and '" + rec_b.rx.value + "'");
  }
  if (rec_a.tx == rec_b.tx && rec_a.m == rec_b.m) {
    throw Error(Errc::InvalidParams, "same-receiver difference needs two distinct packets");
  }
  DifferenceObservation obs;
  obs.kind = DiffKind::SameReceiver;
  obs.tx_i = rec_a.tx;
  obs.tx_j = rec_b.tx;
  obs.rx_k = rec_a.rx;
  obs.m_i = rec_a.m;
  obs.m_j = rec_b.m;
  obs.value_s = rec_b.s_local_s - rec_a.s_local_s;
  return obs;
}

DifferenceObservation diff_same_packet(const ReceptionRecord& rec_k,
                                       const ReceptionRecord& rec_l) {
  if (rec_k.tx != rec_l.tx || rec_k.m != rec_l.m) {
    throw Error(Errc::MismatchedPacket, "same-packet difference needs one (tx, m) packet");
  }
  if (rec_k.rx == rec_l.rx) {
    throw Error(Errc::InvalidParams, "same-packet difference needs two distinct receivers");
  }
  DifferenceObservation obs;
  obs.kind = DiffKind::SamePacket;
  obs.tx_i = rec_k.tx;
  obs.rx_k = rec_k.rx;
  obs.rx_l = rec_l.rx;
  obs.m_i = rec_k.m;
  obs.value_s = rec_k.s_local_s - rec_l.s_local_s;
  return obs;
}

DifferenceObservation dtdoa(const ReceptionRecord& rec_ik, const ReceptionRecord& rec_jk,
                            const ReceptionRecord& rec_il, const ReceptionRecord& rec_jl) {
  bool consistent = rec_ik.tx == rec_il.tx && rec_ik.m == rec_il.m &&  // packet (i, m)
                    rec_jk.tx == rec_jl.tx && rec_jk.m == rec_jl.m &&  // packet (j, m')
                    rec_ik.rx == rec_jk.rx && rec_il.rx == rec_jl.rx &&
                    rec_ik.rx != rec_il.rx;
  bool distinct_packets = !(rec_ik.tx == rec_jk.tx && rec_ik.m == rec_jk.m);
  if (!consistent || !distinct_packets) {
    throw Error(Errc::IncompleteQuad,
                "double difference needs packets (i, m) and (j, m') each heard at receivers k and l");
  }
  DifferenceObservation obs;
  obs.kind = DiffKind::DoubleDifference;
  obs.tx_i = rec_ik.tx;
  obs.tx_j = rec_jk.tx;
  obs.rx_k = rec_ik.rx;
  obs.rx_l = rec_il.rx;
  obs.m_i = rec_ik.m;
  obs.m_j = rec_jk.m;
  obs.value_s = (rec_jk.s_local_s - rec_ik.s_local_s) - (rec_jl.s_local_s - rec_il.s_local_s);
  return obs;
}

DriftEstimate estimate_drift(const std::vector<ReceptionRecord>& records, const NodeId& rx,
                             const NodeId& reference) {
  if (rx == reference) {
    return DriftEstimate{rx, 0.0, reference};
  }

  // Collect (s_reference, s_rx) for packets heard by both.
  std::map<std::pair<NodeId, int>, double> ref_times;
  for (const ReceptionRecord& rec : records) {
    if (rec.rx == reference) ref_times[{rec.tx, rec.m}] = rec.s_local_s;
  }
  std::vector<std::pair<double, double>> points;
  for (const ReceptionRecord& rec : records) {
    if (rec.rx != rx) continue;
    auto it = ref_times.find({rec.tx, rec.m});
    if (it != ref_times.end()) points.emplace_back(it->second, rec.s_local_s);
  }
  if (points.size() < 2) {
    throw Error(Errc::InsufficientCommonPackets,
                "receivers '" + rx.value + "' and '" + reference.value + "' share " +
                    std::to_string(points.size()) + " packets, need >= 2");
  }

  // Centered least-squares slope; centering keeps the sums well conditioned
  // for second-scale timestamps.
  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& [x, y] : points) {
    mean_x += x;
    mean_y += y;
  }
  mean_x /= static_cast<double>(points.size());
  mean_y /= static_cast<double>(points.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mean_x) * (x - mean_x);
    sxy += (x - mean_x) * (y - mean_y);
  }
  if (sxx <= 0.0) {
    throw Error(Errc::InsufficientCommonPackets,
                "common packets for '" + rx.value + "' all arrive at one instant");
  }
  return DriftEstimate{rx, sxy / sxx - 1.0, reference};
}

std::unordered_map<NodeId, DriftEstimate> estimate_all_drifts(
    const std::vector<ReceptionRecord>& records) {
  std::map<NodeId, std::size_t> counts;
  for (const ReceptionRecord& rec : records) counts[rec.rx]++;
  if (counts.empty()) {
    throw Error(Errc::InsufficientCommonPackets, "dataset has no receptions");
  }
  NodeId reference = counts.begin()->first;
  for (const auto& [id, n] : counts) {
    if (n > counts[reference]) reference = id;
  }

  std::unordered_map<NodeId, DriftEstimate> drifts;
  for (const auto& [id, n] : counts) {
    drifts.emplace(id, estimate_drift(records, id, reference));
  }
  return drifts;
}

std::vector<ReceptionRecord> correct_drift(
    const std::vector<ReceptionRecord>& records,
    const std::unordered_map<NodeId, DriftEstimate>& drifts) {
  std::vector<ReceptionRecord> corrected;
  corrected.reserve(records.size());
  for (const ReceptionRecord& rec : records) {
    auto it = drifts.find(rec.rx);
    if (it == drifts.end()) {
      throw Error(Errc::MissingDriftEstimate, "no drift estimate for receiver '" + rec.rx.value + "'");
    }
    ReceptionRecord out = rec;
    out.s_local_s = rec.s_local_s / (1.0 + it->second.relative_drift);
    corrected.push_back(out);
  }
  return corrected;
}

}  // namespace tsloc
