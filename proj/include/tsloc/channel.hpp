#pragma once

#include "tsloc/rng.hpp"
#include "tsloc/scene.hpp"
#include "tsloc/types.hpp"

namespace tsloc {

/// Excess-delay magnitude model, specified in meters and divided by c when
/// applied to reception times.
struct MultipathModel {
  enum class Kind { Off, Uniform, Exponential };
  Kind kind = Kind::Off;
  double max_m = 0.0;   // Uniform draws from [0, max_m]
  double mean_m = 0.0;  // Exponential mean
};

struct NlosBiasModel {
  enum class Kind { Off, Exponential, Fixed };
  Kind kind = Kind::Off;
  double mean_m = 0.0;
  double fixed_m = 0.0;
};

struct ChannelParams {
  MultipathModel multipath;
  NlosBiasModel nlos_bias;
  double c = kSpeedOfLight;
  // Freeze the multipath draw per (tx, rx) link instead of redrawing per
  // reception event.
  bool per_link_frozen = false;
};

void validate_channel_params(const ChannelParams& params);

/// Free-space propagation delay d/c.
double propagation_delay(double distance_m, double c = kSpeedOfLight);

/// Additive reception-time error in seconds: a multipath excess on every
/// link, plus a strictly non-negative bias on NLOS links. Always >= 0.
double spatial_error(LinkFlag flag, const ChannelParams& params, RngStream& rng);

}  // namespace tsloc
