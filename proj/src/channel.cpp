#include "tsloc/channel.hpp"

namespace tsloc {

void validate_channel_params(const ChannelParams& params) {
  if (params.multipath.max_m < 0.0 || params.multipath.mean_m < 0.0) {
    throw Error(Errc::InvalidParams, "multipath magnitudes must be >= 0");
  }
  if (params.nlos_bias.mean_m < 0.0 || params.nlos_bias.fixed_m < 0.0) {
    throw Error(Errc::InvalidParams, "NLOS bias magnitudes must be >= 0");
  }
  if (!(params.c > 0.0)) {
    throw Error(Errc::InvalidParams, "propagation speed must be > 0");
  }
}

double propagation_delay(double distance_m, double c) {
  if (distance_m < 0.0) {
    throw Error(Errc::NegativeDistance, "distance must be >= 0");
  }
  if (!(c > 0.0)) {
    throw Error(Errc::InvalidParams, "propagation speed must be > 0");
  }
  return distance_m / c;
}

double spatial_error(LinkFlag flag, const ChannelParams& params, RngStream& rng) {
  double error_m = 0.0;
  switch (params.multipath.kind) {
    case MultipathModel::Kind::Off:
      break;
    case MultipathModel::Kind::Uniform:
      error_m += rng.uniform(0.0, params.multipath.max_m);
      break;
    case MultipathModel::Kind::Exponential:
      error_m += rng.exponential(params.multipath.mean_m);
      break;
  }
  if (flag == LinkFlag::Nlos) {
    switch (params.nlos_bias.kind) {
      case NlosBiasModel::Kind::Off:
        break;
      case NlosBiasModel::Kind::Exponential:
        error_m += rng.exponential(params.nlos_bias.mean_m);
        break;
      case NlosBiasModel::Kind::Fixed:
        error_m += params.nlos_bias.fixed_m;
        break;
    }
  }
  return error_m / params.c;
}

}  // namespace tsloc
