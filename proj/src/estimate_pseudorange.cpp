#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "estimate_internal.hpp"

namespace tsloc {
namespace detail {

namespace {

using PacketKey = std::pair<NodeId, int>;

// Timestamps grouped by receiver, plus (tx, m) -> s lookup per receiver.
struct ReceiverIndex {
  std::map<NodeId, std::map<PacketKey, double>> by_rx;

  const double* find(const NodeId& rx, const PacketKey& packet) const {
    auto it = by_rx.find(rx);
    if (it == by_rx.end()) return nullptr;
    auto jt = it->second.find(packet);
    return jt == it->second.end() ? nullptr : &jt->second;
  }
};

ReceiverIndex build_index(const std::vector<ReceptionRecord>& records) {
  ReceiverIndex index;
  for (const ReceptionRecord& rec : records) {
    index.by_rx[rec.rx][{rec.tx, rec.m}] = rec.s_local_s;
  }
  return index;
}

struct TimedPacket {
  double s;
  NodeId tx;
  int m;
};

std::vector<TimedPacket> sorted_receptions(const ReceiverIndex& index, const NodeId& rx,
                                           const std::set<NodeId>& allowed_tx) {
  std::vector<TimedPacket> out;
  auto it = index.by_rx.find(rx);
  if (it == index.by_rx.end()) return out;
  for (const auto& [packet, s] : it->second) {
    if (allowed_tx.count(packet.first)) out.push_back({s, packet.first, packet.second});
  }
  std::sort(out.begin(), out.end(), [](const TimedPacket& a, const TimedPacket& b) {
    if (a.s != b.s) return a.s < b.s;
    if (a.tx != b.tx) return a.tx < b.tx;
    return a.m < b.m;
  });
  return out;
}

}  // namespace

double group_weight(const RunningStats& stats, double pooled_var, double floor_var) {
  double per_sample = stats.n >= 2 ? stats.sample_var() : pooled_var;
  double var_of_mean = per_sample / std::max(stats.n, 1);
  return 1.0 / std::max(var_of_mean, floor_var);
}

SamePacketAgg aggregate_same_packet(const std::vector<ReceptionRecord>& records,
                                    const std::set<NodeId>& known, const NodeId& target,
                                    const EstimatorConfig& config) {
  ReceiverIndex index = build_index(records);

  auto target_it = index.by_rx.find(target);
  if (target_it == index.by_rx.end() || target_it->second.empty()) {
    throw Error(Errc::DisconnectedTarget, "target '" + target.value + "' receives no packets");
  }

  // Reference = anchor receiver sharing the most anchor packets with the
  // target; its bias ends up inside the set's common bias.
  NodeId best_ref;
  std::size_t best_count = 0;
  for (const NodeId& ref : known) {
    auto it = index.by_rx.find(ref);
    if (it == index.by_rx.end()) continue;
    std::size_t count = 0;
    for (const auto& [packet, s] : target_it->second) {
      if (!known.count(packet.first) || packet.first == ref) continue;
      if (it->second.count(packet)) ++count;
    }
    if (count > best_count || (count == best_count && count > 0 && ref < best_ref)) {
      best_count = count;
      best_ref = ref;
    }
  }
  if (best_count == 0) {
    throw Error(Errc::DisconnectedTarget,
                "no anchor receiver shares packets with target '" + target.value + "'");
  }

  SamePacketAgg agg;
  agg.ref_rx = best_ref;
  for (const auto& [packet, s_target] : target_it->second) {
    if (!known.count(packet.first) || packet.first == best_ref) continue;
    const double* s_ref = index.find(best_ref, packet);
    if (!s_ref) continue;
    agg.per_anchor[packet.first].add(config.c * (s_target - *s_ref));
  }
  return agg;
}

DoubleDiffAgg aggregate_double_differences(const std::vector<ReceptionRecord>& records,
                                           const std::set<NodeId>& known, const NodeId& target,
                                           const EstimatorConfig& config) {
  ReceiverIndex index = build_index(records);
  DoubleDiffAgg agg;

  bool target_receives = index.by_rx.count(target) != 0;
  std::map<std::tuple<NodeId, NodeId, NodeId, NodeId>, RunningStats> groups;

  if (target_receives) {
    // Quads share the target as first receiver; every anchor receiver that
    // heard both packets contributes one sample.
    std::vector<TimedPacket> timeline = sorted_receptions(index, target, known);
    for (std::size_t i = 1; i < timeline.size(); ++i) {
      const TimedPacket& first = timeline[i - 1];
      const TimedPacket& second = timeline[i];
      if (first.tx == second.tx) continue;
      if (second.s - first.s > config.pairing_window_s) continue;

      for (const NodeId& other_rx : known) {
        if (other_rx == target) continue;
        const double* s_l_first = index.find(other_rx, {first.tx, first.m});
        const double* s_l_second = index.find(other_rx, {second.tx, second.m});
        if (!s_l_first || !s_l_second) continue;

        double dd = (second.s - first.s) - (*s_l_second - *s_l_first);
        // Canonical transmitter order, flipping the sign with it.
        if (first.tx < second.tx) {
          groups[{first.tx, second.tx, target, other_rx}].add(config.c * dd);
        } else {
          groups[{second.tx, first.tx, target, other_rx}].add(-config.c * dd);
        }
      }
    }
    agg.transmit_mode = false;
  } else {
    // Locate a silent-receiver target from its own transmissions: pair each
    // target packet with a nearby packet from a known transmitter, as seen on
    // any anchor receiver's timeline, then difference across receiver pairs.
    agg.transmit_mode = true;
    std::set<std::tuple<NodeId, int, NodeId, int>> seen_pairs;  // (target packet, other packet)
    std::set<NodeId> allowed = known;
    allowed.insert(target);

    for (const NodeId& pairing_rx : known) {
      std::vector<TimedPacket> timeline = sorted_receptions(index, pairing_rx, allowed);
      for (std::size_t i = 1; i < timeline.size(); ++i) {
        const TimedPacket& first = timeline[i - 1];
        const TimedPacket& second = timeline[i];
        if (first.tx == second.tx) continue;
        if (second.s - first.s > config.pairing_window_s) continue;
        bool first_is_target = first.tx == target;
        bool second_is_target = second.tx == target;
        if (first_is_target == second_is_target) continue;

        const TimedPacket& own = first_is_target ? first : second;
        const TimedPacket& other = first_is_target ? second : first;
        if (!seen_pairs.insert({target, own.m, other.tx, other.m}).second) continue;

        // One sample per unordered pair of anchor receivers hearing all four.
        std::vector<NodeId> hearers;
        for (const NodeId& rx : known) {
          if (index.find(rx, {target, own.m}) && index.find(rx, {other.tx, other.m})) {
            hearers.push_back(rx);
          }
        }
        for (std::size_t a = 0; a + 1 < hearers.size(); ++a) {
          for (std::size_t b = a + 1; b < hearers.size(); ++b) {
            const NodeId& rx_k = hearers[a];
            const NodeId& rx_l = hearers[b];
            double dk = *index.find(rx_k, {other.tx, other.m}) - *index.find(rx_k, {target, own.m});
            double dl = *index.find(rx_l, {other.tx, other.m}) - *index.find(rx_l, {target, own.m});
            // c*dd = d(other,k) - d(target,k) - d(other,l) + d(target,l)
            groups[{target, other.tx, rx_k, rx_l}].add(config.c * (dk - dl));
          }
        }
      }
    }
  }

  for (const auto& [key, stats] : groups) {
    agg.groups.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key),
                          stats});
  }
  return agg;
}

namespace {

struct DiffEdge {
  NodeId u, v;
  double value_m;  // estimates p(v) - p(u)
  double weight;
};

/// Reconciles pairwise differences into one value per node (node `base` at
/// 0), weighted least squares over the difference graph. Only the connected
/// component holding the most total weight survives.
std::vector<PseudoRangeEntry> solve_difference_graph(std::vector<DiffEdge> edges,
                                                     double weight_floor_var) {
  if (edges.empty()) return {};

  // Connected components by union-find over node ids.
  std::map<NodeId, NodeId> parent;
  std::function<NodeId(NodeId)> find = [&](NodeId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const DiffEdge& e : edges) {
    parent.try_emplace(e.u, e.u);
    parent.try_emplace(e.v, e.v);
  }
  for (const DiffEdge& e : edges) {
    NodeId ru = find(e.u), rv = find(e.v);
    if (ru != rv) parent[rv] = ru;
  }
  std::map<NodeId, double> component_weight;
  for (const DiffEdge& e : edges) component_weight[find(e.u)] += e.weight;
  NodeId best_root = component_weight.begin()->first;
  for (const auto& [root, w] : component_weight) {
    if (w > component_weight[best_root]) best_root = root;
  }
  std::erase_if(edges, [&](const DiffEdge& e) { return find(e.u) != best_root; });

  std::vector<NodeId> nodes;
  for (const auto& [id, root] : parent) {
    if (find(id) == best_root) nodes.push_back(id);
  }
  std::sort(nodes.begin(), nodes.end());
  const NodeId base = nodes.front();

  std::map<NodeId, int> var_index;
  int next = 0;
  for (const NodeId& id : nodes) {
    if (id != base) var_index[id] = next++;
  }

  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(next, next);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(next);
  for (const DiffEdge& e : edges) {
    int iu = e.u == base ? -1 : var_index[e.u];
    int iv = e.v == base ? -1 : var_index[e.v];
    if (iu >= 0) {
      normal(iu, iu) += e.weight;
      rhs(iu) -= e.weight * e.value_m;
    }
    if (iv >= 0) {
      normal(iv, iv) += e.weight;
      rhs(iv) += e.weight * e.value_m;
    }
    if (iu >= 0 && iv >= 0) {
      normal(iu, iv) -= e.weight;
      normal(iv, iu) -= e.weight;
    }
  }
  Eigen::VectorXd solution =
      next > 0 ? Eigen::VectorXd(normal.ldlt().solve(rhs)) : Eigen::VectorXd();

  std::map<NodeId, double> info;
  for (const DiffEdge& e : edges) {
    info[e.u] += e.weight;
    info[e.v] += e.weight;
  }

  std::vector<PseudoRangeEntry> entries;
  for (const NodeId& id : nodes) {
    double value = id == base ? 0.0 : solution(var_index.at(id));
    double weight = std::min(info[id], 1.0 / weight_floor_var);
    entries.push_back({id, value, weight});
  }
  return entries;
}

}  // namespace
}  // namespace detail

PseudoRangeSet extract_pseudoranges(const std::vector<ReceptionRecord>& records,
                                    const std::vector<NoisyPrior>& anchors, const NodeId& target,
                                    DiffKind scheme, const EstimatorConfig& config) {
  std::set<NodeId> known;
  std::map<NodeId, Eigen::VectorXd> known_pos;
  for (const NoisyPrior& anchor : anchors) {
    if (anchor.node == target) continue;
    known.insert(anchor.node);
    known_pos[anchor.node] = anchor.pos0;
  }
  if (known.size() < 2) {
    throw Error(Errc::InsufficientAnchors,
                "target '" + target.value + "' has " + std::to_string(known.size()) +
                    " anchors, need >= 2");
  }
  auto dist = [&](const NodeId& a, const NodeId& b) {
    return (known_pos.at(a) - known_pos.at(b)).norm();
  };

  PseudoRangeSet prs;
  prs.target = target;

  if (scheme == DiffKind::SamePacket) {
    detail::SamePacketAgg agg = detail::aggregate_same_packet(records, known, target, config);
    double pooled = detail::pooled_sample_var(
        agg.per_anchor.begin(), agg.per_anchor.end(),
        [](const auto& kv) -> const detail::RunningStats& { return kv.second; });
    for (const auto& [anchor, stats] : agg.per_anchor) {
      // c*(s_target - s_ref) + d(anchor, ref) estimates d(anchor, target)
      // up to the shared receiver-bias term.
      double value = stats.mean + dist(anchor, agg.ref_rx);
      double weight = detail::group_weight(stats, pooled, config.weight_floor_var_m2);
      prs.entries.push_back({anchor, value, weight});
    }
  } else {
    // SameReceiver pairs differenced across receivers are exactly the
    // double-difference quads, so both schemes aggregate identically.
    detail::DoubleDiffAgg agg = detail::aggregate_double_differences(records, known, target, config);
    double pooled = detail::pooled_sample_var(
        agg.groups.begin(), agg.groups.end(),
        [](const detail::DoubleDiffGroup& g) -> const detail::RunningStats& { return g.stats; });

    std::vector<detail::DiffEdge> edges;
    for (const detail::DoubleDiffGroup& g : agg.groups) {
      double weight = detail::group_weight(g.stats, pooled, config.weight_floor_var_m2);
      if (!agg.transmit_mode) {
        // mean = d(b,target) - d(a,target) - d(b,l) + d(a,l)
        double value = g.stats.mean + dist(g.tx_b, g.rx_l) - dist(g.tx_a, g.rx_l);
        edges.push_back({g.tx_a, g.tx_b, value, weight});
      } else {
        // mean = d(j,k) - d(target,k) - d(j,l) + d(target,l)
        double value = g.stats.mean - dist(g.tx_b, g.rx_k) + dist(g.tx_b, g.rx_l);
        edges.push_back({g.rx_k, g.rx_l, value, weight});
      }
    }
    if (edges.empty()) {
      throw Error(Errc::DisconnectedTarget,
                  "no double-difference quads available for target '" + target.value + "'");
    }
    prs.entries = detail::solve_difference_graph(std::move(edges), config.weight_floor_var_m2);
  }

  if (prs.entries.size() < 2) {
    throw Error(Errc::InsufficientAnchors,
                "target '" + target.value + "' resolved only " +
                    std::to_string(prs.entries.size()) + " pseudo-ranges");
  }
  return prs;
}

}  // namespace tsloc
