// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "swaplab/dataset.hpp"
#include "swaplab/model.hpp"
#include "swaplab/optimizer.hpp"
#include "swaplab/schedule.hpp"
#include "swaplab/swa.hpp"

namespace swaplab {

enum class TrainMode { kSgdSmall, kSgdLarge, kSwap, kSwa };

TrainMode train_mode_from_string(const std::string& s);
std::string to_string(TrainMode m);

struct DataConfig {
  std::string kind;  // gaussian_blobs, two_spirals, csv, idx
  int n_train = 0, n_test = 0, dim = 0, classes = 0;
  double noise = 0.0;
  uint64_t seed = 0;
  std::string train_path, test_path;                            // csv
  std::string train_images, train_labels, test_images, test_labels;  // idx
  bool standardize = false;
};

/// Plain (non-SWAP) training arm: one schedule, one batch size, a stopping
/// accuracy (1.0 = run all epochs).
struct SgdConfig {
  int batch = 0;
  int epochs = 0;
  int workers = 1;
  double stop_accuracy = 1.0;
  ScheduleSpec schedule;
};

/// Complete declarative description of one experiment.
struct RunConfig {
  ModelSpec model;
  DataConfig data;
  OptimizerConfig optimizer;
  PhasePlan phase_plan;
  std::optional<ScheduleSpec> lr1, lr2, cyclic;
  std::optional<SwaPlan> swa;
  std::optional<SgdConfig> sgd;
  uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
  std::string out_dir = "run";
  bool has_phase_plan = false;
  /// Cadence of per-worker / shared-model test-accuracy sampling: 0 = final
  /// epoch only, k > 0 = additionally every k epochs. The averaged-model
  /// curve is always sampled at every phase-2 epoch boundary.
  int eval_every = 0;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  /// Normalized echo; parsing the echo reproduces this config.
  nlohmann::json to_json() const;

  /// Structural, mode-specific checks (section presence, worker counts).
  void validate(TrainMode mode) const;
  /// Checks that need the materialized dataset (batch sizes vs N, dims).
  void validate_with_data(TrainMode mode, const Dataset& train, const Dataset& test) const;

  std::string model_fingerprint() const;
  std::string data_fingerprint() const;
};

/// Applies a dotted-path override like "schedules.cyclic.lr_peak=0.1" onto
/// raw config JSON (numbers, bools and strings are auto-detected).
void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace swaplab
