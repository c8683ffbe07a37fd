#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace tsloc {

// All randomness in the toolkit flows through these helpers so that a run is
// reproducible bit-for-bit from one master seed. Streams are derived by
// hashing (seed, tag, node, packet, ...) keys instead of consuming from a
// shared generator; adding a node or reordering generation loops therefore
// does not perturb draws belonging to other entities.

uint64_t splitmix64(uint64_t& state);

/// Stateless hash of a key tuple into a stream seed.
uint64_t mix_seed(std::initializer_list<uint64_t> parts);

/// FNV-1a hash for string keys (node ids, component tags).
uint64_t hash_string(std::string_view s);

/// Small deterministic PRNG (splitmix64 sequence) with the handful of
/// distributions the simulator needs.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform in [0, 1).
  double uniform01();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (pairs cached).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Exponential with the given mean.
  double exponential(double mean);

 private:
  uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// One-shot normal draw addressed by key; independent of call order.
double keyed_normal(uint64_t seed, uint64_t key, double mean, double stddev);

}  // namespace tsloc
