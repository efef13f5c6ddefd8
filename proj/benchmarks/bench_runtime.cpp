// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "swaplab/runtime.hpp"

using namespace swaplab;

namespace {

void BM_Phase1Step(benchmark::State& state) {
  int w_count = static_cast<int>(state.range(0));
  ModelSpec spec = make_model_spec({16, 64, 10}, false);
  RngStream rng(0, "init");
  WeightVector init = init_weights(spec, rng);
  Dataset data = generate_synthetic(SyntheticKind::kGaussianBlobs, 4096, 16, 10, 1.5, 1);
  OptimizerConfig cfg;
  cfg.momentum = 0.9;
  ThreadPool pool(0);

  std::vector<WorkerState> workers;
  for (int w = 0; w < w_count; ++w) {
    WorkerState ws;
    ws.worker_id = w;
    ws.rng = RngStream(0, "phase1/worker/" + std::to_string(w));
    ws.model = init;
    ws.opt = make_optimizer_state(init);
    workers.push_back(std::move(ws));
  }
  RngStream order(1, "phase1/data");
  BatchPlan plan = epoch_batches(data, 1024, order);

  int sb = 0;
  for (auto _ : state) {
    phase1_step(workers, spec, data, plan, sb, 1e-4, cfg, pool);
    sb = (sb + 1) % plan.full_super_batches();
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_Phase1Step)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->ArgName("workers")->UseRealTime();

void BM_Phase2Epochs(benchmark::State& state) {
  int w_count = static_cast<int>(state.range(0));
  ModelSpec spec = make_model_spec({16, 64, 10}, true);
  RngStream rng(0, "init");
  WeightVector init = init_weights(spec, rng);
  Dataset data = generate_synthetic(SyntheticKind::kGaussianBlobs, 2048, 16, 10, 1.5, 1);
  OptimizerConfig cfg;
  cfg.momentum = 0.9;
  PhasePlan plan;
  plan.tau = 1.0;
  plan.max_epochs_phase1 = 1;
  plan.epochs_phase2 = 2;
  plan.b1 = std::max(w_count, 8) * 16;
  plan.b2 = 64;
  plan.workers = w_count;
  auto sched = ScheduleSpec::piecewise({{0.0, 0.05}, {2.0, 0.01}});
  ThreadPool pool(0);

  for (auto _ : state) {
    auto models = run_phase2(init, spec, plan, sched, data, nullptr, cfg, 1, pool);
    benchmark::DoNotOptimize(models.front().params[0].data[0]);
  }
  state.SetItemsProcessed(state.iterations() * w_count * 2 * 2048);
}
BENCHMARK(BM_Phase2Epochs)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->ArgName("workers")->UseRealTime();

}  // namespace
