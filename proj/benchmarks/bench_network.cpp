// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "swaplab/dataset.hpp"
#include "swaplab/network.hpp"

using namespace swaplab;

namespace {

struct Setup {
  ModelSpec spec;
  WeightVector weights;
  Dataset data;

  Setup(int d, int hidden, int classes, bool bn, int n) {
    spec = make_model_spec({d, hidden, hidden, classes}, bn);
    RngStream rng(0, "init");
    weights = init_weights(spec, rng);
    data = generate_synthetic(SyntheticKind::kGaussianBlobs, n, d, classes, 1.5, 1);
  }

  Batch batch(int size) const {
    std::vector<int> idx(static_cast<size_t>(size));
    for (int i = 0; i < size; ++i) idx[static_cast<size_t>(i)] = i;
    return gather(data, idx);
  }
};

void BM_LossAndGrad(benchmark::State& state) {
  Setup s(16, 64, 10, state.range(1) != 0, 4096);
  Batch b = s.batch(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    LossGrad lg = loss_and_grad(s.weights, s.spec, b);
    benchmark::DoNotOptimize(lg.loss);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGrad)
    ->ArgsProduct({{16, 64, 256, 1024}, {0, 1}})
    ->ArgNames({"batch", "bn"});

void BM_Evaluate(benchmark::State& state) {
  Setup s(16, 64, 10, true, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    EvalResult r = evaluate(s.weights, s.spec, s.data);
    benchmark::DoNotOptimize(r.accuracy);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Evaluate)->Arg(1024)->Arg(8192)->ArgName("n");

void BM_RecomputeBnStats(benchmark::State& state) {
  Setup s(16, 64, 10, true, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    WeightVector fresh = recompute_bn_stats(s.weights, s.spec, s.data);
    benchmark::DoNotOptimize(fresh.bn[0].mean[0]);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RecomputeBnStats)->Arg(1024)->Arg(8192)->ArgName("n");

}  // namespace
