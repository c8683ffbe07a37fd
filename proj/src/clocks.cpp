#include "tsloc/clocks.hpp"

#include <cmath>

namespace tsloc {

namespace {
constexpr uint64_t kHPathTag = 0x68'70'61'74'68;  // "hpath"
constexpr uint64_t kWNoiseTag = 0x77'6E'6F'69;    // "wnoi"
constexpr uint64_t kBackwardTag = 0xB4C4;
}  // namespace

std::optional<std::string> validate_clock_params(const ClockParams& params) {
  if (!(params.drift > -1.0)) {
    throw Error(Errc::InvalidParams, "clock drift must be > -1 (frequency must stay positive)");
  }
  if (params.noise_sigma_s < 0.0) {
    throw Error(Errc::InvalidParams, "noise_sigma_s must be >= 0");
  }
  if (params.quantization_step_s < 0.0) {
    throw Error(Errc::InvalidParams, "quantization_step_s must be >= 0");
  }
  if (params.h.model == SlowErrorParams::Model::GaussMarkov) {
    if (params.h.sigma_s < 0.0) {
      throw Error(Errc::InvalidParams, "slow-error sigma must be >= 0");
    }
    if (!(params.h.tau_corr_s > 0.0)) {
      throw Error(Errc::InvalidParams, "slow-error correlation time must be > 0");
    }
  }
  if (std::abs(params.drift) > 100e-6) {
    return "clock drift " + std::to_string(params.drift * 1e6) +
           " ppm is beyond the few tens of ppm expected from commercial oscillators";
  }
  return std::nullopt;
}

ClockRealization::ClockRealization(const ClockParams& params, uint64_t seed)
    : params_(params), seed_(seed), noise_stream_(mix_seed({seed, kWNoiseTag})) {
  validate_clock_params(params_);
  if (params_.h.model == SlowErrorParams::Model::GaussMarkov && params_.h.sigma_s > 0.0) {
    grid_step_s_ = params_.h.tau_corr_s / 10.0;
    ar_coeff_ = std::exp(-grid_step_s_ / params_.h.tau_corr_s);
    ar_noise_s_ = params_.h.sigma_s * std::sqrt(1.0 - ar_coeff_ * ar_coeff_);
  }
}

double ClockRealization::grid_value(long index) const {
  // AR(1) recursion outward from the origin; innovations are addressed by
  // grid index so lazily growing the path in any order yields the same values.
  if (index >= 0) {
    if (h_forward_.empty()) {
      h_forward_.push_back(params_.h.sigma_s *
                           keyed_normal(seed_, mix_seed({kHPathTag, 0}), 0.0, 1.0));
    }
    while (static_cast<long>(h_forward_.size()) <= index) {
      long n = static_cast<long>(h_forward_.size());
      double z = keyed_normal(seed_, mix_seed({kHPathTag, static_cast<uint64_t>(n)}), 0.0, 1.0);
      h_forward_.push_back(ar_coeff_ * h_forward_.back() + ar_noise_s_ * z);
    }
    return h_forward_[static_cast<std::size_t>(index)];
  }
  // The stationary Gauss-Markov process is time-reversible, so the same
  // recursion extends the path to negative times.
  long back = -index;  // 1-based
  while (static_cast<long>(h_backward_.size()) < back) {
    long n = static_cast<long>(h_backward_.size()) + 1;
    double prev = (n == 1) ? grid_value(0) : h_backward_[static_cast<std::size_t>(n - 2)];
    double z = keyed_normal(seed_, mix_seed({kHPathTag, kBackwardTag, static_cast<uint64_t>(n)}),
                            0.0, 1.0);
    h_backward_.push_back(ar_coeff_ * prev + ar_noise_s_ * z);
  }
  return h_backward_[static_cast<std::size_t>(back - 1)];
}

double ClockRealization::slow_error_at(double r_s) const {
  if (grid_step_s_ <= 0.0) return 0.0;
  double x = r_s / grid_step_s_;
  double lo = std::floor(x);
  double frac = x - lo;
  long i0 = static_cast<long>(lo);
  double h0 = grid_value(i0);
  if (frac == 0.0) return h0;
  double h1 = grid_value(i0 + 1);
  return h0 * (1.0 - frac) + h1 * frac;
}

double ClockRealization::apply(double r_s, double w) const {
  double s = params_.bias_s + (1.0 + params_.drift) * r_s + slow_error_at(r_s) + w;
  if (params_.quantization_step_s > 0.0) {
    s = std::floor(s / params_.quantization_step_s) * params_.quantization_step_s;
  }
  return s;
}

double ClockRealization::local_timestamp(double r_s) {
  if (!std::isfinite(r_s)) {
    throw Error(Errc::InvalidParams, "reception time must be finite");
  }
  double w = params_.noise_sigma_s > 0.0 ? noise_stream_.normal(0.0, params_.noise_sigma_s) : 0.0;
  return apply(r_s, w);
}

double ClockRealization::local_timestamp_keyed(double r_s, uint64_t key) const {
  if (!std::isfinite(r_s)) {
    throw Error(Errc::InvalidParams, "reception time must be finite");
  }
  double w = params_.noise_sigma_s > 0.0
                 ? keyed_normal(seed_, mix_seed({kWNoiseTag, key}), 0.0, params_.noise_sigma_s)
                 : 0.0;
  return apply(r_s, w);
}

}  // namespace tsloc
