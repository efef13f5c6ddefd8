// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "swaplab/dataset.hpp"
#include "swaplab/history.hpp"
#include "swaplab/model.hpp"
#include "swaplab/optimizer.hpp"
#include "swaplab/runtime.hpp"
#include "swaplab/schedule.hpp"
#include "swaplab/thread_pool.hpp"

namespace swaplab {

enum class SwaVariant { kLargeBatchSwa, kLbThenSbSwa, kSmallBatchSwa };

SwaVariant swa_variant_from_string(const std::string& s);
std::string to_string(SwaVariant v);

/// Sequential SWA sampler configuration. The cyclic segment uses lb_batch for
/// the large-batch variant and sb_batch otherwise; the lb_then_sb variant's
/// large-batch prefix is driven by the experiment's phase plan.
struct SwaPlan {
  SwaVariant variant = SwaVariant::kSmallBatchSwa;
  int cycles = 1;            // C
  int cycle_epochs = 1;
  int samples_per_cycle = 1;
  int lb_batch = 0;
  int sb_batch = 0;

  int sample_count() const { return cycles * samples_per_cycle; }
  void validate() const;
};

struct SwaResult {
  WeightVector averaged;
  std::vector<WeightVector> samples;
  RunHistory history;
};

/// Sequential cyclic-LR training from `start`; the model is snapshotted at
/// the end of each of samples_per_cycle equal sub-segments of every cycle
/// (the lowest-LR points), snapshots are averaged uniformly and BN stats
/// recomputed on the training data. History rows are per epoch; snapshot rows
/// carry the snapshot's test accuracy, the phase-3 row the averaged model's.
SwaResult swa_run(const WeightVector& start, const ModelSpec& spec, const SwaPlan& plan,
                  const ScheduleSpec& cyclic, const Dataset& train, const Dataset* test,
                  const OptimizerConfig& cfg, uint64_t master_seed, ThreadPool& pool,
                  RunHistory* prefix_history = nullptr, long step_offset = 0);

/// One row of the SWA-vs-SWAP comparison (Table-style: accuracies before and
/// after averaging plus wall-clock).
struct RunSummary {
  std::string method;
  double before_avg_acc = NAN;
  double after_avg_acc = NAN;
  double wall_clock_s = 0.0;
  int sample_count = 0;
  std::string model_fingerprint;
  std::string data_fingerprint;
};

struct CompareReport {
  std::vector<RunSummary> rows;
  std::string to_text() const;
  void write_csv(std::ostream& out) const;
};

/// Requires matched model/data fingerprints and equal sample counts.
CompareReport swa_vs_swap_report(const RunSummary& swa, const RunSummary& swap);

}  // namespace swaplab
