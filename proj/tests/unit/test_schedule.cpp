// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "swaplab/error.hpp"
#include "swaplab/rng.hpp"
#include "swaplab/schedule.hpp"

using namespace swaplab;

TEST_CASE("piecewise schedule hits the warm-up peak exactly") {
  // Warm-up 30 epochs to peak 1.2, decay to 0 at 150.
  auto s = ScheduleSpec::piecewise({{0.0, 0.0}, {30.0, 1.2}, {150.0, 0.0}});
  CHECK(lr_at(s, 30.0) == 1.2);
  CHECK(lr_at(s, 0.0) == 0.0);
  CHECK(lr_at(s, 15.0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(lr_at(s, 90.0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(lr_at(s, 150.0) == 0.0);
  CHECK(lr_at(s, 400.0) == 0.0);   // clamped beyond the horizon
  CHECK(lr_at(s, -1.0) == 0.0);    // clamped below
}

TEST_CASE("degenerate cyclic schedule (min == peak) is constant") {
  auto s = ScheduleSpec::cyclic_spec(10.0, 0.05, 0.05, 4);
  for (double pos : {0.0, 3.7, 10.0, 25.0, 39.99, 60.0}) CHECK(lr_at(s, pos) == 0.05);
}

TEST_CASE("cyclic sawtooth matches the closed form") {
  auto s = ScheduleSpec::cyclic_spec(10.0, 0.05, 0.005, 8);
  // Closed-form oracle.
  auto oracle = [](double pos) { return 0.05 - (0.05 - 0.005) * std::fmod(pos, 10.0) / 10.0; };
  CHECK(lr_at(s, 12.5) == doctest::Approx(oracle(12.5)).epsilon(1e-15));

  RngStream rng(0, "positions");
  for (int i = 0; i < 1000; ++i) {
    double pos = rng.next_double() * 80.0;
    CHECK(std::fabs(lr_at(s, pos) - oracle(pos)) <= 1e-12);
  }
  // Restart at cycle boundaries, clamp past the horizon.
  CHECK(lr_at(s, 10.0) == 0.05);
  CHECK(lr_at(s, 80.0) == 0.005);
  CHECK(lr_at(s, 99.0) == 0.005);
}

TEST_CASE("lr_at never returns a negative value (property)") {
  auto pw = ScheduleSpec::piecewise({{0.0, 0.1}, {5.0, 0.0}, {9.0, 1.0}});
  auto cy = ScheduleSpec::cyclic_spec(3.0, 0.4, 0.0, 5);
  RngStream rng(1, "positions");
  for (int i = 0; i < 2000; ++i) {
    double pos = rng.next_double() * 20.0 - 2.0;
    CHECK(lr_at(pw, pos) >= 0.0);
    CHECK(lr_at(cy, pos) >= 0.0);
  }
}

TEST_CASE("piecewise lr_at is continuous (property)") {
  auto s = ScheduleSpec::piecewise({{0.0, 0.0}, {2.5, 0.9}, {7.0, 0.2}, {11.0, 0.0}});
  RngStream rng(2, "positions");
  for (int i = 0; i < 2000; ++i) {
    double pos = rng.next_double() * 12.0;
    double gap = std::fabs(lr_at(s, pos + 1e-9) - lr_at(s, pos));
    CHECK(gap < 1e-8);
  }
}

TEST_CASE("cyclic lr_at is non-increasing within a cycle (property)") {
  auto s = ScheduleSpec::cyclic_spec(4.0, 0.3, 0.01, 6);
  RngStream rng(3, "positions");
  for (int i = 0; i < 2000; ++i) {
    int cycle = static_cast<int>(rng.next_below(6));
    double a = rng.next_double() * 4.0;
    double b = rng.next_double() * 4.0;
    if (a > b) std::swap(a, b);
    CHECK(lr_at(s, cycle * 4.0 + a) >= lr_at(s, cycle * 4.0 + b));
  }
}

TEST_CASE("schedule validation rejects malformed specs") {
  CHECK_THROWS_AS(ScheduleSpec::piecewise({{0.0, 0.1}, {0.0, 0.2}}), ContractError);
  CHECK_THROWS_AS(ScheduleSpec::piecewise({{0.0, -0.1}}), ContractError);
  CHECK_THROWS_AS(ScheduleSpec::cyclic_spec(0.0, 0.1, 0.0, 3), ContractError);
  CHECK_THROWS_AS(ScheduleSpec::cyclic_spec(5.0, 0.1, 0.2, 3), ContractError);
}

TEST_CASE("phase-1 exit: tau threshold") {
  PhasePlan plan;
  plan.tau = 0.98;
  plan.max_epochs_phase1 = 150;
  plan.epochs_phase2 = 1;
  plan.b1 = 8;
  plan.b2 = 4;
  plan.workers = 2;
  plan.validate();

  CHECK(phase1_exit_check(0.981, plan, 10) == Phase1Exit::kExitTau);
  CHECK(phase1_exit_check(0.98, plan, 10) == Phase1Exit::kExitTau);  // >= at the boundary
  CHECK(phase1_exit_check(0.979, plan, 10) == Phase1Exit::kContinue);
  CHECK(phase1_exit_check(0.5, plan, 149) == Phase1Exit::kExitMaxEpochs);
  CHECK(phase1_exit_check(0.99, plan, 149) == Phase1Exit::kExitTau);  // tau wins at the cap

  plan.tau = 1.0;
  CHECK(phase1_exit_check(0.999, plan, 10) == Phase1Exit::kContinue);
  CHECK(phase1_exit_check(1.0, plan, 10) == Phase1Exit::kExitTau);
}

TEST_CASE("phase-1 exit is monotone in accuracy (property)") {
  PhasePlan plan;
  plan.tau = 0.9;
  plan.max_epochs_phase1 = 50;
  plan.epochs_phase2 = 1;
  plan.b1 = 4;
  plan.b2 = 2;
  plan.workers = 1;
  RngStream rng(4, "acc");
  for (int i = 0; i < 1000; ++i) {
    double a = rng.next_double();
    int epoch = static_cast<int>(rng.next_below(49));
    if (phase1_exit_check(a, plan, epoch) == Phase1Exit::kExitTau) {
      double higher = a + (1.0 - a) * rng.next_double();
      CHECK(phase1_exit_check(higher, plan, epoch) == Phase1Exit::kExitTau);
    }
  }
}

TEST_CASE("phase plan validation") {
  PhasePlan plan;
  plan.tau = 0.9;
  plan.max_epochs_phase1 = 10;
  plan.epochs_phase2 = 2;
  plan.b1 = 12;
  plan.b2 = 3;
  plan.workers = 4;
  CHECK_NOTHROW(plan.validate());

  PhasePlan bad = plan;
  bad.b1 = 10;  // not divisible by 4
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = plan;
  bad.workers = 16;  // b1 < workers
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = plan;
  bad.tau = 1.5;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = plan;
  bad.epochs_phase2 = 0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  // tau = 0 is allowed: phase 1 exits after its first epoch evaluation.
  bad = plan;
  bad.tau = 0.0;
  CHECK_NOTHROW(bad.validate());
}
