// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace swaplab {

/// 64-bit FNV-1a. Used for stream labels, file provenance and replica checksums.
uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64(std::string_view s);
std::string hash_hex(uint64_t h);

/// Deterministic named random stream (PCG32 core).
///
/// A stream is identified by (seed, label): the label selects the PCG
/// sequence, so streams with the same seed and different labels are
/// statistically independent and reproducible in isolation. The draw counter
/// plus raw state are exposed so streams can be checkpointed and resumed.
class RngStream {
 public:
  RngStream() = default;
  RngStream(uint64_t seed, std::string label);

  uint32_t next_u32();
  uint64_t next_u64();
  /// Uniform in [0,1) with 53 random bits.
  double next_double();
  /// Standard normal via Box-Muller (two uniform draws per call).
  double next_normal();
  /// Uniform integer in [0, bound), unbiased. bound must be >= 1.
  uint64_t next_below(uint64_t bound);
  /// Uniform in [lo, hi).
  double next_uniform(double lo, double hi);

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  const std::string& label() const { return label_; }
  uint64_t seed() const { return seed_; }
  uint64_t draws() const { return draws_; }

  struct State {
    uint64_t state = 0;
    uint64_t inc = 1;
    uint64_t draws = 0;
  };
  State save() const { return {state_, inc_, draws_}; }
  void restore(const State& s) {
    state_ = s.state;
    inc_ = s.inc;
    draws_ = s.draws;
  }

 private:
  std::string label_;
  uint64_t seed_ = 0;
  uint64_t state_ = 0;
  uint64_t inc_ = 1;
  uint64_t draws_ = 0;
};

}  // namespace swaplab
