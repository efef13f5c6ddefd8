// SPDX-License-Identifier: Apache-2.0
#include "swaplab/rng.hpp"

#include <cmath>

#include "swaplab/error.hpp"

namespace swaplab {

uint64_t fnv1a64(const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

std::string hash_hex(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

namespace {

uint64_t splitmix64(uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr uint64_t kPcgMult = 6364136223846793005ULL;

}  // namespace

RngStream::RngStream(uint64_t seed, std::string label)
    : label_(std::move(label)), seed_(seed) {
  // pcg32_srandom: sequence selected by the label hash, state by the seed.
  uint64_t mix = seed;
  uint64_t initstate = splitmix64(mix);
  inc_ = (fnv1a64(label_) << 1u) | 1u;
  state_ = 0;
  next_u32();
  state_ += initstate;
  next_u32();
  draws_ = 0;
}

uint32_t RngStream::next_u32() {
  uint64_t old = state_;
  state_ = old * kPcgMult + inc_;
  ++draws_;
  uint32_t xorshifted = static_cast<uint32_t>(((old >> 18u) ^ old) >> 27u);
  uint32_t rot = static_cast<uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
}

uint64_t RngStream::next_u64() {
  uint64_t hi = next_u32();
  uint64_t lo = next_u32();
  return (hi << 32) | lo;
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_normal() {
  // Box-Muller, cosine branch only. u1 is kept away from 0 for the log.
  double u1 = 0.0;
  do {
    u1 = next_double();
  } while (u1 <= 0.0);
  double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

uint64_t RngStream::next_below(uint64_t bound) {
  check(bound >= 1, "RngStream::next_below: bound must be >= 1");
  if (bound == 1) return 0;
  // Rejection sampling on the top of the range keeps the draw unbiased.
  uint64_t threshold = (0ULL - bound) % bound;
  for (;;) {
    uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

double RngStream::next_uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

}  // namespace swaplab
