// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace swaplab {

/// One logged training record. Absent metrics are NaN (empty CSV cells,
/// omitted JSON fields). Phase-1 rows are per synchronized step; epoch
/// boundaries additionally carry the epoch's running train accuracy and test
/// accuracies. Phase-2 rows are per epoch boundary. The phase-3 row carries
/// the final averaged model's test accuracy.
struct HistoryRecord {
  int phase = 1;
  long step = 0;               // global step t, strictly increasing
  int epoch = 0;               // phase-local epoch index
  double lr = 0.0;
  double batch_loss = NAN;
  double batch_acc = NAN;
  double epoch_train_acc = NAN;
  double test_acc_model = NAN;       // shared model (phase 1) / plain runs
  double test_acc_avg_model = NAN;   // averaged model, when sampled
  std::vector<double> worker_test_acc;  // per-worker, when sampled
};

struct PhaseTiming {
  double phase1_s = 0.0;
  double phase2_s = 0.0;
  double phase3_s = 0.0;
  double total_s = 0.0;
};

/// Full run log. Timing is reported in summaries only, never in the CSV/JSON
/// exports, which must be byte-identical across reruns.
struct RunHistory {
  std::vector<HistoryRecord> records;
  long phase1_end_step = 0;  // T
  PhaseTiming timing;

  /// Enforces the strictly-increasing-step invariant.
  void append(HistoryRecord rec);
  long last_step() const { return records.empty() ? 0 : records.back().step; }

  void write_csv(std::ostream& out, int worker_count) const;
  nlohmann::json to_json(int worker_count) const;
};

}  // namespace swaplab
