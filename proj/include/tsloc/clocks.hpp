#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsloc/rng.hpp"
#include "tsloc/types.hpp"

namespace tsloc {

/// Model for the slowly-varying clock error component h(t): either absent or
/// a first-order Gauss-Markov (exponentially correlated) process with
/// stationary standard deviation `sigma_s` and correlation time `tau_corr_s`.
struct SlowErrorParams {
  enum class Model { Off, GaussMarkov };
  Model model = Model::Off;
  double sigma_s = 0.0;
  double tau_corr_s = 1.0;
};

/// Receiver clock error description. A local timestamp for an absolute
/// reception time r is
///
///   s = bias + (1 + drift) * r + h(r) + w,   w ~ N(0, noise_sigma^2)
///
/// with optional truncation of s to a tick grid afterwards. Drift is a
/// fractional frequency offset (20 ppm = 2.0e-5).
struct ClockParams {
  double bias_s = 0.0;
  double drift = 0.0;
  SlowErrorParams h;
  double noise_sigma_s = 0.0;
  // > 0 enables tick-grid truncation of emitted timestamps (0 = off).
  double quantization_step_s = 0.0;
};

/// Throws InvalidParams for impossible values (drift <= -1, negative sigmas).
/// Returns a warning for suspicious-but-legal values (|drift| beyond 100 ppm,
/// well above commercial oscillators).
std::optional<std::string> validate_clock_params(const ClockParams& params);

/// One sampled trajectory of a receiver clock. Construction is deterministic
/// given (params, seed): the h path is realized lazily on a grid of step
/// tau_corr/10 with draws addressed by grid index, so the path does not
/// depend on query order. Intended to be confined to a single trial; the
/// unkeyed `local_timestamp` consumes from a private noise stream.
class ClockRealization {
 public:
  ClockRealization(const ClockParams& params, uint64_t seed);

  const ClockParams& params() const { return params_; }

  /// Local timestamp for absolute reception time r; draws a fresh w.
  double local_timestamp(double r_s);

  /// Same mapping with w addressed by `key` (e.g. a packet identity). Used by
  /// the simulator so datasets are invariant to event enumeration order.
  double local_timestamp_keyed(double r_s, uint64_t key) const;

  /// The realized slowly-varying component h(r).
  double slow_error_at(double r_s) const;

 private:
  double apply(double r_s, double w) const;
  double grid_value(long index) const;

  ClockParams params_;
  uint64_t seed_;
  double grid_step_s_ = 0.0;
  double ar_coeff_ = 0.0;    // exp(-step/tau)
  double ar_noise_s_ = 0.0;  // sigma * sqrt(1 - ar_coeff^2)
  mutable std::vector<double> h_forward_;   // indices 0, 1, 2, ...
  mutable std::vector<double> h_backward_;  // indices -1, -2, ...
  mutable RngStream noise_stream_;
};

}  // namespace tsloc
