// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "swaplab/dataset.hpp"
#include "swaplab/history.hpp"
#include "swaplab/model.hpp"
#include "swaplab/network.hpp"
#include "swaplab/optimizer.hpp"
#include "swaplab/rng.hpp"
#include "swaplab/schedule.hpp"
#include "swaplab/thread_pool.hpp"
#include "swaplab/weights.hpp"

namespace swaplab {

/// One simulated data-parallel worker: id, private random stream, model
/// replica and momentum buffer. In phase 1 all replicas hold identical values
/// after every synchronized step.
struct WorkerState {
  int worker_id = 0;
  RngStream rng;
  WeightVector model;
  OptimizerState opt;
};

/// (theta_i, g_i) pair captured at an epoch boundary: the iterate and the
/// descent gradient used at it (consensus gradient in phase 1, worker-0
/// minibatch gradient in phase 2). Feeds the cosine diagnostic.
struct TraceSnapshot {
  int phase = 1;
  long step = 0;
  int epoch = 0;
  WeightVector theta;
  Gradient grad;
};

struct TraceCapture {
  std::vector<TraceSnapshot> snapshots;
};

struct StepStats {
  double batch_loss = 0.0;
  double batch_acc = 0.0;
};

/// One synchronized large-batch step: every worker computes the mean gradient
/// of its contiguous shard of super-batch `sb`, the shards are reduced in
/// worker-id order to the consensus g_t = (1/W) sum g^w, and every replica
/// applies the identical update. Replica checksums are verified afterwards.
void phase1_step(std::vector<WorkerState>& workers, const ModelSpec& spec, const Dataset& data,
                 const BatchPlan& plan, int sb, double lr, const OptimizerConfig& cfg,
                 ThreadPool& pool, StepStats* stats = nullptr, Gradient* consensus_out = nullptr);

struct Phase1Result {
  WeightVector model;
  long steps = 0;  // T
  int epochs = 0;
  Phase1Exit exit_reason = Phase1Exit::kExitMaxEpochs;
  double final_train_acc = 0.0;
};

/// Loops phase1_step over epoch-shuffled shards until the tau / epoch-cap
/// check fires. The tau test uses the running mean of minibatch accuracies
/// over the epoch just completed. max_epochs_phase1 == 0 skips the phase.
/// test_eval_every: 0 evaluates the shared model only at the exit epoch,
/// k > 0 additionally every k epochs.
Phase1Result run_phase1(const WeightVector& init, const ModelSpec& spec, const PhasePlan& plan,
                        const ScheduleSpec& lr1, const Dataset& train, const Dataset* test,
                        const OptimizerConfig& cfg, uint64_t master_seed, ThreadPool& pool,
                        RunHistory* history = nullptr, TraceCapture* trace = nullptr,
                        int test_eval_every = 0);

struct Phase2Options {
  /// Test hook: every worker draws from worker 0's stream seed, which must
  /// make all returned models identical.
  bool force_identical_streams = false;
  /// Record the averaged-model test accuracy at every epoch boundary
  /// (non-invasive: workers are averaged into a scratch copy).
  bool record_avg_curve = true;
  /// Per-worker test accuracy cadence: 0 samples only the final epoch,
  /// k > 0 additionally every k epochs.
  int worker_eval_every = 0;
  long step_offset = 0;  // global step of the last phase-1 update
};

/// W independent small-batch refinements from a common start: fresh zero
/// momentum, per-worker streams "phase2/worker/<id>", each worker reshuffles
/// the full dataset every epoch, no synchronization between updates (workers
/// only rendezvous at epoch boundaries so the averaged-model curve can be
/// sampled). Returns the W final models in worker order.
std::vector<WeightVector> run_phase2(const WeightVector& start, const ModelSpec& spec,
                                     const PhasePlan& plan, const ScheduleSpec& lr2,
                                     const Dataset& train, const Dataset* test,
                                     const OptimizerConfig& cfg, uint64_t master_seed,
                                     ThreadPool& pool, RunHistory* history = nullptr,
                                     const Phase2Options& opts = {},
                                     TraceCapture* trace = nullptr);

/// Exactly the trajectory worker `worker_id` takes inside run_phase2, run
/// alone; phase-2 isolation means run_phase2's models[worker_id] equals this.
WeightVector run_phase2_single_worker(const WeightVector& start, const ModelSpec& spec,
                                      const PhasePlan& plan, const ScheduleSpec& lr2,
                                      const Dataset& train, const OptimizerConfig& cfg,
                                      uint64_t master_seed, int worker_id);

/// Uniform average of the trainable parameters followed by a BN-statistics
/// recomputation over `train_data`; input running stats are discarded.
WeightVector phase3_average(const std::vector<WeightVector>& models, const ModelSpec& spec,
                            const Dataset& train_data);

struct SwapResult {
  WeightVector final_model;
  std::vector<WeightVector> pre_average_models;
  RunHistory history;
};

}  // namespace swaplab
