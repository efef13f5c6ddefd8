// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swaplab/matrix.hpp"
#include "swaplab/rng.hpp"

namespace swaplab {

/// Where a dataset came from: a generator + seed, or a file + content hash.
struct Provenance {
  std::string kind;      // "gaussian_blobs", "two_spirals", "csv", "idx"
  std::string detail;    // generator params or file path(s)
  uint64_t seed = 0;
  std::string hash_hex;  // FNV-1a over file bytes, empty for generators
};

struct Dataset {
  Matrix features;          // [N x d]
  std::vector<int> labels;  // class indices < class_count
  int class_count = 0;
  Provenance provenance;

  size_t size() const { return features.rows; }
  int dim() const { return static_cast<int>(features.cols); }
  void validate() const;
};

/// One minibatch view materialized from a dataset.
struct Batch {
  Matrix inputs;            // [n x d]
  std::vector<int> labels;  // length n
  size_t size() const { return inputs.rows; }
};

Batch gather(const Dataset& data, std::span<const int> indices);

enum class SyntheticKind { kGaussianBlobs, kTwoSpirals };
SyntheticKind synthetic_kind_from_string(const std::string& s);

/// Deterministic synthetic classification data; classes balanced within one
/// sample. gaussian_blobs draws class centroids uniformly in [-4,4]^d and
/// adds noise * N(0,I); two_spirals requires d=2, classes=2.
Dataset generate_synthetic(SyntheticKind kind, int n, int d, int classes, double noise,
                           uint64_t seed);

struct CsvSchema {
  bool has_header = true;
  int class_count = 0;  // 0 = infer as max label + 1
};

/// CSV: header row, numeric feature columns, final integer label column.
Dataset load_csv(const std::string& path, const CsvSchema& schema = {});
void save_csv(const Dataset& data, const std::string& path);

/// IDX image/label pair (big-endian magic 0x803 / 0x801); pixels scaled to [0,1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Per-feature mean-0/var-1 transform fitted on `train`, applied to both
/// splits. Zero-variance features pass through unscaled.
void standardize_features(Dataset& train, Dataset* test);

struct ShardSpec {
  int worker_count = 1;
  int worker_id = 0;
};

/// One epoch's visit order. `batches` holds [begin,end) ranges into
/// `permutation` for the consumer the plan was built for: unsharded plans
/// keep the trailing partial batch, sharded plans drop the trailing partial
/// super-batch and contain the worker's contiguous shard of each full one.
struct BatchPlan {
  std::vector<int> permutation;
  int batch_size = 0;
  std::vector<std::pair<int, int>> batches;

  int batch_count() const { return static_cast<int>(batches.size()); }
  std::span<const int> batch_indices(int b) const;
  /// Number of full batch_size-sized super-batches in the permutation.
  int full_super_batches() const;
  /// Worker `worker_id`'s contiguous shard of super-batch `sb`.
  std::span<const int> shard_indices(int sb, int worker_count, int worker_id) const;
};

/// Fresh permutation drawn from `rng`, then sliced per `shard`.
BatchPlan epoch_batches(const Dataset& data, int batch_size, RngStream& rng,
                        std::optional<ShardSpec> shard = std::nullopt);

uint64_t hash_file(const std::string& path);

}  // namespace swaplab
