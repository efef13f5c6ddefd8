// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "swaplab/config.hpp"
#include "swaplab/dataset.hpp"
#include "swaplab/runtime.hpp"
#include "swaplab/swa.hpp"

namespace swaplab {

struct PreparedData {
  Dataset train;
  Dataset test;
};

/// Materializes (generates or loads) the configured dataset splits, applying
/// opt-in standardization fitted on the training split.
PreparedData build_dataset(const RunConfig& cfg);

/// Everything one training invocation produces.
struct TrainOutcome {
  TrainMode mode = TrainMode::kSwap;
  WeightVector final_model;
  std::vector<WeightVector> models;  // phase-2 worker models / SWA snapshots
  std::optional<WeightVector> phase1_model;
  RunHistory history;
  RunSummary summary;
  ModelSpec spec;
};

/// Composes the configured run: swap = phase1 -> phase2 -> phase3; swa =
/// optional large-batch prefix + cyclic sampler; sgd_* = one plain arm driven
/// by the sgd section. `trace`, when given, captures (theta, gradient)
/// snapshots at epoch boundaries for the cosine diagnostic.
TrainOutcome run_experiment(const RunConfig& cfg, TrainMode mode, const PreparedData& data,
                            ThreadPool& pool, TraceCapture* trace = nullptr);

/// Writes the run directory: config_echo.json, history.csv/json, summary.json
/// (the only artifact carrying wall-clock), data/{train,test}.csv and
/// checkpoints/. Everything except summary.json is byte-reproducible from
/// (config, seed).
void write_run_artifacts(const TrainOutcome& outcome, const RunConfig& cfg,
                         const PreparedData& data, const std::string& out_dir);

RunSummary load_run_summary(const std::string& run_dir);

}  // namespace swaplab
