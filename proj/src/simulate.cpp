#include "tsloc/simulate.hpp"

#include <algorithm>
#include <cmath>

namespace tsloc {

namespace {
constexpr uint64_t kScheduleTag = 0x5C4ED;
constexpr uint64_t kSpatialTag = 0x5BA71A1;
constexpr uint64_t kPriorTag = 0x9410B;
constexpr uint64_t kFrozenTag = 0xF60CE2;

uint64_t packet_key(const NodeId& tx, int m) {
  return mix_seed({hash_string(tx.value), static_cast<uint64_t>(m)});
}
}  // namespace

Reachability Reachability::full() { return Reachability{}; }

Reachability Reachability::from_pairs(std::vector<std::pair<NodeId, NodeId>> tx_rx_pairs) {
  Reachability r;
  r.mode_ = Mode::Pairs;
  r.pairs_.insert(tx_rx_pairs.begin(), tx_rx_pairs.end());
  return r;
}

Reachability Reachability::full_except(std::vector<std::pair<NodeId, NodeId>> excluded_tx_rx) {
  Reachability r;
  r.mode_ = Mode::FullExcept;
  r.pairs_.insert(excluded_tx_rx.begin(), excluded_tx_rx.end());
  return r;
}

bool Reachability::can_hear(const NodeId& tx, const NodeId& rx) const {
  switch (mode_) {
    case Mode::Full: return true;
    case Mode::Pairs: return pairs_.count({tx, rx}) != 0;
    case Mode::FullExcept: return pairs_.count({tx, rx}) == 0;
  }
  return false;
}

std::vector<PacketEvent> generate_schedule(const Scene& scene, const ScheduleModel& model,
                                           double horizon_s, uint64_t seed) {
  if (!(horizon_s > 0.0)) {
    throw Error(Errc::InvalidParams, "schedule horizon must be > 0");
  }
  switch (model.kind) {
    case ScheduleModel::Kind::Poisson:
      if (!(model.rate_hz > 0.0)) throw Error(Errc::InvalidParams, "Poisson rate must be > 0");
      break;
    case ScheduleModel::Kind::JitteredPeriodic:
      if (!(model.period_s > 0.0)) throw Error(Errc::InvalidParams, "period must be > 0");
      if (model.jitter_frac < 0.0 || model.jitter_frac >= 1.0) {
        throw Error(Errc::InvalidParams, "jitter_frac must be in [0, 1)");
      }
      break;
  }

  std::vector<PacketEvent> events;
  bool any_tx = false;
  for (const NodeId& id : scene.node_ids()) {
    if (!scene.can_transmit(id)) continue;
    any_tx = true;
    RngStream rng(mix_seed({seed, kScheduleTag, hash_string(id.value)}));
    int m = 0;
    if (model.kind == ScheduleModel::Kind::Poisson) {
      double t = rng.exponential(1.0 / model.rate_hz);
      while (t < horizon_s) {
        events.push_back({id, m++, t});
        t += rng.exponential(1.0 / model.rate_hz);
      }
    } else {
      for (double base = 0.0; base < horizon_s; base += model.period_s) {
        double jitter = model.jitter_frac > 0.0
                            ? rng.uniform(0.0, model.jitter_frac * model.period_s)
                            : 0.0;
        events.push_back({id, m++, base + jitter});
      }
    }
  }
  if (!any_tx) {
    throw Error(Errc::NoTransmitters, "no transmit-capable node in scene");
  }

  std::sort(events.begin(), events.end(), [](const PacketEvent& a, const PacketEvent& b) {
    if (a.t_abs_s != b.t_abs_s) return a.t_abs_s < b.t_abs_s;
    if (a.tx != b.tx) return a.tx < b.tx;
    return a.m < b.m;
  });
  return events;
}

std::vector<ReceptionRecord> generate_receptions(
    const Scene& scene, std::unordered_map<NodeId, ClockRealization>& clocks,
    const ChannelParams& channel, const std::vector<PacketEvent>& schedule,
    const Reachability& reach, uint64_t seed, std::vector<double>* r_abs_out) {
  validate_channel_params(channel);
  std::vector<ReceptionRecord> records;
  if (r_abs_out) r_abs_out->clear();

  for (const PacketEvent& event : schedule) {
    uint64_t event_key = packet_key(event.tx, event.m);
    for (const NodeId& rx : scene.node_ids()) {
      if (rx == event.tx) continue;  // a node never receives its own packet
      if (!scene.can_receive(rx)) continue;
      if (!reach.can_hear(event.tx, rx)) continue;
      auto clock_it = clocks.find(rx);
      if (clock_it == clocks.end()) {
        throw Error(Errc::MissingClock, "receiver '" + rx.value + "' has no clock realization");
      }

      double delay = propagation_delay(scene.distance(event.tx, rx), channel.c);
      uint64_t link_key = mix_seed({hash_string(event.tx.value), hash_string(rx.value)});
      uint64_t draw_key = channel.per_link_frozen
                              ? mix_seed({seed, kSpatialTag, kFrozenTag, link_key})
                              : mix_seed({seed, kSpatialTag, link_key,
                                          static_cast<uint64_t>(event.m)});
      RngStream spatial_rng(draw_key);
      double excess = spatial_error(scene.link_flag(event.tx, rx), channel, spatial_rng);

      double r = event.t_abs_s + delay + excess;
      double s = clock_it->second.local_timestamp_keyed(r, event_key);
      records.push_back({rx, event.tx, event.m, s});
      if (r_abs_out) r_abs_out->push_back(r);
    }
  }
  return records;
}

std::vector<NoisyPrior> perturb_priors(const Scene& scene,
                                       const std::map<NodeId, double>& gnss_sigma_m,
                                       uint64_t seed) {
  for (const auto& [id, sigma] : gnss_sigma_m) {
    if (!scene.contains(id)) {
      throw Error(Errc::UnknownNodeId, "gnss sigma for unknown node '" + id.value + "'");
    }
    if (scene.role(id) != NodeRole::MobileGnss) {
      throw Error(Errc::SigmaForBlindNode,
                  "gnss sigma listed for non-GNSS node '" + id.value + "'");
    }
    if (sigma < 0.0) {
      throw Error(Errc::InvalidParams, "gnss sigma must be >= 0");
    }
  }

  std::vector<NoisyPrior> priors;
  for (const NodeId& id : scene.node_ids()) {
    NodeRole role = scene.role(id);
    if (role == NodeRole::Blind) continue;
    if (role == NodeRole::MobileGnss) {
      auto it = gnss_sigma_m.find(id);
      if (it == gnss_sigma_m.end()) {
        throw Error(Errc::InvalidParams, "GNSS node '" + id.value + "' has no sigma entry");
      }
      double sigma = it->second;
      Eigen::VectorXd pos = scene.position(id);
      if (sigma > 0.0) {
        RngStream rng(mix_seed({seed, kPriorTag, hash_string(id.value)}));
        for (Eigen::Index axis = 0; axis < pos.size(); ++axis) {
          pos[axis] += rng.normal(0.0, sigma);
        }
      }
      priors.push_back({id, pos, sigma});
    } else {
      priors.push_back({id, scene.position(id), 0.0});
    }
  }
  return priors;
}

}  // namespace tsloc
