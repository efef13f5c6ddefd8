// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

namespace swaplab {

/// Learning-rate schedule over an epoch-valued clock (fractional positions
/// allowed; phase-1 and phase-2 each run their own clock).
struct ScheduleSpec {
  enum class Kind { kPiecewiseLinear, kCyclic };
  Kind kind = Kind::kPiecewiseLinear;

  /// piecewise_linear: (epoch position, lr) knots, strictly increasing positions.
  std::vector<std::pair<double, double>> knots;

  /// cyclic: linear sawtooth from lr_peak down to lr_min within each cycle,
  /// restarting at every cycle boundary.
  double cycle_length_epochs = 0.0;
  double lr_peak = 0.0;
  double lr_min = 0.0;
  int cycles = 0;

  void validate() const;
  double horizon_epochs() const;

  static ScheduleSpec piecewise(std::vector<std::pair<double, double>> knots);
  static ScheduleSpec cyclic_spec(double cycle_length_epochs, double lr_peak, double lr_min,
                                  int cycles);
};

/// Learning rate at an epoch position; total after clamping to the horizon.
double lr_at(const ScheduleSpec& spec, double epoch_position);

/// The SWAP phase plan: tau exit threshold, epoch budgets, batch sizes, workers.
struct PhasePlan {
  double tau = 1.0;          // training-accuracy threshold ending phase 1
  int max_epochs_phase1 = 0;
  int epochs_phase2 = 1;     // Q
  int b1 = 0;
  int b2 = 0;
  int workers = 1;           // W

  void validate() const;
};

enum class Phase1Exit { kContinue, kExitTau, kExitMaxEpochs };

/// Once-per-epoch check: tau wins over the epoch cap; comparison is >=.
Phase1Exit phase1_exit_check(double train_accuracy, const PhasePlan& plan, int epoch);

}  // namespace swaplab
