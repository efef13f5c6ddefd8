// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swaplab/model.hpp"
#include "swaplab/rng.hpp"
#include "swaplab/weights.hpp"

namespace swaplab {

/// Labeled RNG stream position, enough to resume the stream exactly.
struct RngCheckpoint {
  std::string label;
  uint64_t seed = 0;
  RngStream::State state;
};

/// Self-describing single-file snapshot: model spec, named trainable tensors
/// (row-major float64), BN running stats, optional optimizer velocity, and
/// labeled RNG positions. Layout documented in docs/formats.md; writes are
/// byte-deterministic for identical contents.
struct Checkpoint {
  ModelSpec spec;
  WeightVector weights;
  std::optional<Gradient> velocity;
  std::vector<RngCheckpoint> rng_streams;
  std::map<std::string, std::string> meta;  // phase, step, etc.
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace swaplab
