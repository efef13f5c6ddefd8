// SPDX-License-Identifier: Apache-2.0
#include "swaplab/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "swaplab/error.hpp"

namespace swaplab {

void ScheduleSpec::validate() const {
  if (kind == Kind::kPiecewiseLinear) {
    check(!knots.empty(), "schedule: piecewise_linear needs at least one knot");
    for (size_t i = 0; i < knots.size(); ++i) {
      check(knots[i].second >= 0.0, "schedule: lr must be >= 0");
      if (i > 0)
        check(knots[i].first > knots[i - 1].first,
              "schedule: knot positions must be strictly increasing");
    }
  } else {
    check(cycle_length_epochs > 0.0, "schedule: cycle_length_epochs must be > 0");
    check(cycles >= 1, "schedule: cycles must be >= 1");
    check(lr_peak >= 0.0 && lr_min >= 0.0, "schedule: lr must be >= 0");
    check(lr_peak >= lr_min, "schedule: lr_peak must be >= lr_min");
  }
}

double ScheduleSpec::horizon_epochs() const {
  if (kind == Kind::kPiecewiseLinear) return knots.back().first;
  return cycle_length_epochs * cycles;
}

ScheduleSpec ScheduleSpec::piecewise(std::vector<std::pair<double, double>> knots) {
  ScheduleSpec s;
  s.kind = Kind::kPiecewiseLinear;
  s.knots = std::move(knots);
  s.validate();
  return s;
}

ScheduleSpec ScheduleSpec::cyclic_spec(double cycle_length_epochs, double lr_peak,
                                       double lr_min, int cycles) {
  ScheduleSpec s;
  s.kind = Kind::kCyclic;
  s.cycle_length_epochs = cycle_length_epochs;
  s.lr_peak = lr_peak;
  s.lr_min = lr_min;
  s.cycles = cycles;
  s.validate();
  return s;
}

double lr_at(const ScheduleSpec& spec, double epoch_position) {
  double pos = std::max(epoch_position, 0.0);

  if (spec.kind == ScheduleSpec::Kind::kPiecewiseLinear) {
    const auto& k = spec.knots;
    if (pos <= k.front().first) return k.front().second;
    if (pos >= k.back().first) return k.back().second;
    // Knots are strictly increasing; find the segment containing pos.
    size_t hi = 1;
    while (k[hi].first < pos) ++hi;
    const auto& [x0, y0] = k[hi - 1];
    const auto& [x1, y1] = k[hi];
    double t = (pos - x0) / (x1 - x0);
    return y0 + t * (y1 - y0);
  }

  double horizon = spec.horizon_epochs();
  if (pos >= horizon) return spec.lr_min;
  double in_cycle = std::fmod(pos, spec.cycle_length_epochs);
  double frac = in_cycle / spec.cycle_length_epochs;
  return spec.lr_peak - (spec.lr_peak - spec.lr_min) * frac;
}

void PhasePlan::validate() const {
  check(tau >= 0.0 && tau <= 1.0, "phase_plan: tau must be in [0, 1]");
  check(max_epochs_phase1 >= 0, "phase_plan: max_epochs_phase1 must be >= 0");
  check(epochs_phase2 >= 1, "phase_plan: epochs_phase2 (Q) must be >= 1");
  check(workers >= 1, "phase_plan: workers must be >= 1");
  check(b1 >= workers, "phase_plan: b1 must be >= workers");
  check(b1 % workers == 0, "phase_plan: b1 must be divisible by workers");
  check(b2 >= 1, "phase_plan: b2 must be >= 1");
}

Phase1Exit phase1_exit_check(double train_accuracy, const PhasePlan& plan, int epoch) {
  if (train_accuracy >= plan.tau) return Phase1Exit::kExitTau;
  if (epoch + 1 >= plan.max_epochs_phase1) return Phase1Exit::kExitMaxEpochs;
  return Phase1Exit::kContinue;
}

}  // namespace swaplab
