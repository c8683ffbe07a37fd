#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <set>
#include <unordered_map>
#include <vector>

#include "tsloc/channel.hpp"
#include "tsloc/clocks.hpp"
#include "tsloc/scene.hpp"

namespace tsloc {

struct ScheduleModel {
  enum class Kind { Poisson, JitteredPeriodic };
  Kind kind = Kind::Poisson;
  double rate_hz = 1.0;      // Poisson
  double period_s = 1.0;     // JitteredPeriodic
  double jitter_frac = 0.0;  // in [0, 1): per-event uniform jitter as a fraction of the period
};

/// Packet m transmitted by `tx` at absolute time `t_abs_s`. Transmission
/// times exist only on the simulation side; estimators never see them.
struct PacketEvent {
  NodeId tx;
  int m = 0;
  double t_abs_s = 0.0;
};

/// The one observable: packet (tx, m) timestamped by receiver rx on its own
/// clock.
struct ReceptionRecord {
  NodeId rx;
  NodeId tx;
  int m = 0;
  double s_local_s = 0.0;
};

/// Position knowledge handed to the estimators: exact for fixed stations
/// (sigma0 = 0), GNSS-grade for mobile helpers (sigma0 > 0). Blind nodes have
/// no prior at all.
struct NoisyPrior {
  NodeId node;
  Eigen::VectorXd pos0;
  double sigma0_m = 0.0;
};

/// Which (tx -> rx) links deliver packets. Delivery is explicit config, not
/// derived from a propagation-loss model.
class Reachability {
 public:
  static Reachability full();
  static Reachability from_pairs(std::vector<std::pair<NodeId, NodeId>> tx_rx_pairs);
  static Reachability full_except(std::vector<std::pair<NodeId, NodeId>> excluded_tx_rx);

  bool can_hear(const NodeId& tx, const NodeId& rx) const;

 private:
  enum class Mode { Full, Pairs, FullExcept };
  Mode mode_ = Mode::Full;
  std::set<std::pair<NodeId, NodeId>> pairs_;
};

/// Asynchronous transmission schedules for every transmit-capable node over
/// [0, horizon). Returned time-sorted; packet indices are consecutive from 0
/// per transmitter. Each transmitter draws from its own seed-derived stream.
std::vector<PacketEvent> generate_schedule(const Scene& scene, const ScheduleModel& model,
                                           double horizon_s, uint64_t seed);

/// Forward model: absolute reception time r = t_abs + d/c + spatial error,
/// then through the receiver clock. If `r_abs_out` is non-null it receives
/// the true r for each emitted record (validation side-table).
std::vector<ReceptionRecord> generate_receptions(
    const Scene& scene, std::unordered_map<NodeId, ClockRealization>& clocks,
    const ChannelParams& channel, const std::vector<PacketEvent>& schedule,
    const Reachability& reach, uint64_t seed, std::vector<double>* r_abs_out = nullptr);

/// GNSS-style priors: mobile nodes perturbed with per-axis zero-mean Gaussian
/// noise of the listed sigma, fixed stations copied exactly, blind nodes
/// omitted.
std::vector<NoisyPrior> perturb_priors(const Scene& scene,
                                       const std::map<NodeId, double>& gnss_sigma_m,
                                       uint64_t seed);

}  // namespace tsloc
