// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include "swaplab/error.hpp"
#include "swaplab/network.hpp"
#include "swaplab/swa.hpp"
#include "test_util.hpp"

using namespace swaplab;

namespace {

struct Fixture {
  ModelSpec spec;
  WeightVector start;
  Dataset data;
  OptimizerConfig cfg;

  explicit Fixture(bool bn = false, uint64_t seed = 0) {
    spec = make_model_spec({3, 8, 3}, bn);
    RngStream rng(seed, "init");
    start = init_weights(spec, rng);
    data = testutil::blobs(72, 3, 3, 1.0, seed + 50);
    cfg.momentum = 0.9;
  }
};

SwaPlan sb_plan(int cycles, int cycle_epochs, int spc = 1) {
  SwaPlan plan;
  plan.variant = SwaVariant::kSmallBatchSwa;
  plan.cycles = cycles;
  plan.cycle_epochs = cycle_epochs;
  plan.samples_per_cycle = spc;
  plan.sb_batch = 8;
  return plan;
}

}  // namespace

TEST_CASE("a single cycle averages to the lone snapshot") {
  Fixture f(true);
  ThreadPool pool(1);
  SwaPlan plan = sb_plan(1, 2);
  auto sched = ScheduleSpec::cyclic_spec(2.0, 0.05, 0.005, 1);
  SwaResult r = swa_run(f.start, f.spec, plan, sched, f.data, nullptr, f.cfg, 3, pool);
  REQUIRE(r.samples.size() == 1);
  WeightVector expect = recompute_bn_stats(r.samples[0], f.spec, f.data);
  CHECK(r.averaged.checksum() == expect.checksum());
}

TEST_CASE("zero learning rate keeps every snapshot at the start") {
  Fixture f(false);
  ThreadPool pool(1);
  SwaPlan plan = sb_plan(3, 2);
  auto sched = ScheduleSpec::cyclic_spec(2.0, 0.0, 0.0, 3);
  SwaResult r = swa_run(f.start, f.spec, plan, sched, f.data, nullptr, f.cfg, 3, pool);
  REQUIRE(r.samples.size() == 3);
  for (const auto& s : r.samples) CHECK(s.checksum() == f.start.checksum());
  CHECK(r.averaged.checksum() == f.start.checksum());
}

TEST_CASE("samples_per_cycle > 1 snapshots at sub-cycle boundaries") {
  Fixture f(false);
  ThreadPool pool(1);
  SwaPlan plan = sb_plan(2, 4, 2);  // snapshot every 2 epochs
  auto sched = ScheduleSpec::cyclic_spec(4.0, 0.05, 0.005, 2);
  SwaResult r = swa_run(f.start, f.spec, plan, sched, f.data, nullptr, f.cfg, 4, pool);
  CHECK(r.samples.size() == 4);
  CHECK(plan.sample_count() == 4);
}

TEST_CASE("swa_run enforces the cyclic-schedule precondition") {
  Fixture f(false);
  ThreadPool pool(1);
  SwaPlan plan = sb_plan(2, 2);
  auto piecewise = ScheduleSpec::piecewise({{0.0, 0.1}, {4.0, 0.0}});
  CHECK_THROWS_AS(
      (void)swa_run(f.start, f.spec, plan, piecewise, f.data, nullptr, f.cfg, 1, pool),
      ContractError);
  auto mismatched = ScheduleSpec::cyclic_spec(2.0, 0.05, 0.005, 5);
  CHECK_THROWS_AS(
      (void)swa_run(f.start, f.spec, plan, mismatched, f.data, nullptr, f.cfg, 1, pool),
      ContractError);
}

TEST_CASE("swa history records snapshot accuracies and the averaged row") {
  Fixture f(false);
  ThreadPool pool(1);
  Dataset test = testutil::blobs(30, 3, 3, 1.0, 99);
  SwaPlan plan = sb_plan(2, 3);
  auto sched = ScheduleSpec::cyclic_spec(3.0, 0.05, 0.005, 2);
  SwaResult r = swa_run(f.start, f.spec, plan, sched, f.data, &test, f.cfg, 3, pool);
  int snapshot_rows = 0;
  bool final_row = false;
  for (const auto& rec : r.history.records) {
    if (!std::isnan(rec.test_acc_model)) ++snapshot_rows;
    if (rec.phase == 3 && !std::isnan(rec.test_acc_avg_model)) final_row = true;
  }
  CHECK(snapshot_rows == 2);
  CHECK(final_row);
  CHECK(r.history.records.size() == 2 * 3 + 1);  // per-epoch rows + final
}

TEST_CASE("compare report: identical runs give identical columns") {
  RunSummary s;
  s.method = "swap";
  s.before_avg_acc = 0.91;
  s.after_avg_acc = 0.95;
  s.wall_clock_s = 12.5;
  s.sample_count = 8;
  s.model_fingerprint = "m";
  s.data_fingerprint = "d";
  CompareReport r = swa_vs_swap_report(s, s);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].before_avg_acc == r.rows[1].before_avg_acc);
  CHECK(r.rows[0].after_avg_acc == r.rows[1].after_avg_acc);
  CHECK(r.rows[0].wall_clock_s == r.rows[1].wall_clock_s);

  std::ostringstream csv;
  r.write_csv(csv);
  CHECK(csv.str().find("swap,8,0.91,0.95,12.5") != std::string::npos);
  CHECK(r.to_text().find("swap") != std::string::npos);
}

TEST_CASE("compare report rejects mismatched sample counts and specs") {
  RunSummary swa;
  swa.method = "swa";
  swa.sample_count = 8;
  swa.model_fingerprint = "m";
  swa.data_fingerprint = "d";
  RunSummary swap = swa;
  swap.method = "swap";
  swap.sample_count = 4;
  CHECK_THROWS_AS((void)swa_vs_swap_report(swa, swap), ContractError);
  swap.sample_count = 8;
  swap.model_fingerprint = "other";
  CHECK_THROWS_AS((void)swa_vs_swap_report(swa, swap), ContractError);
  swap.model_fingerprint = "m";
  CHECK_NOTHROW((void)swa_vs_swap_report(swa, swap));
}

TEST_CASE("swa plan validation") {
  SwaPlan plan = sb_plan(2, 4, 3);  // 4 % 3 != 0
  CHECK_THROWS_AS(plan.validate(), ContractError);
  plan = sb_plan(0, 4);
  CHECK_THROWS_AS(plan.validate(), ContractError);
  plan = sb_plan(2, 4);
  plan.sb_batch = 0;
  CHECK_THROWS_AS(plan.validate(), ContractError);
  plan.variant = SwaVariant::kLargeBatchSwa;
  plan.lb_batch = 16;
  CHECK_NOTHROW(plan.validate());
}
