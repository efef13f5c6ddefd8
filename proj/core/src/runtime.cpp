// SPDX-License-Identifier: Apache-2.0
#include "swaplab/runtime.hpp"

#include <cmath>
#include <string>

#include "swaplab/error.hpp"

namespace swaplab {

namespace {

/// Test accuracy of a model whose running stats may be stale: BN stats are
/// recomputed on the training split first (identity for BN-free models).
double test_accuracy(const WeightVector& model, const ModelSpec& spec, const Dataset& train,
                     const Dataset& test) {
  WeightVector fresh = recompute_bn_stats(model, spec, train);
  return evaluate(fresh, spec, test).accuracy;
}

struct EpochStats {
  double mean_loss = 0.0;
  double mean_acc = 0.0;
};

/// One epoch of sequential minibatch SGD for a single worker. The learning
/// rate clock is phase-local: position = epoch + batch/batches_per_epoch.
/// Optionally snapshots (theta, grad) at the epoch's last step.
EpochStats run_worker_epoch(WorkerState& w, const ModelSpec& spec, const Dataset& train,
                            int batch_size, const ScheduleSpec& sched, int epoch,
                            const OptimizerConfig& cfg, TraceSnapshot* snap_out,
                            long step_base_for_snap) {
  BatchPlan plan = epoch_batches(train, batch_size, w.rng);
  int nb = plan.batch_count();
  EpochStats stats;
  for (int b = 0; b < nb; ++b) {
    double lr = lr_at(sched, static_cast<double>(epoch) +
                                 static_cast<double>(b) / static_cast<double>(nb));
    Batch batch = gather(train, plan.batch_indices(b));
    double acc = 0.0;
    LossGrad lg;
    try {
      lg = loss_and_grad(w.model, spec, batch, &acc);
    } catch (const NumericError& e) {
      throw NumericError("worker " + std::to_string(w.worker_id) + " epoch " +
                         std::to_string(epoch) + " batch " + std::to_string(b) + ": " +
                         e.what());
    }
    if (snap_out && b == nb - 1) {
      snap_out->theta = w.model;
      snap_out->grad = lg.grad;
      snap_out->step = step_base_for_snap + b + 1;
      snap_out->epoch = epoch;
    }
    sgd_update_inplace(w.model, w.opt, lg.grad, lr, cfg);
    stats.mean_loss += lg.loss;
    stats.mean_acc += acc;
  }
  stats.mean_loss /= nb;
  stats.mean_acc /= nb;
  return stats;
}

}  // namespace

void phase1_step(std::vector<WorkerState>& workers, const ModelSpec& spec, const Dataset& data,
                 const BatchPlan& plan, int sb, double lr, const OptimizerConfig& cfg,
                 ThreadPool& pool, StepStats* stats, Gradient* consensus_out) {
  int w_count = static_cast<int>(workers.size());
  check(w_count >= 1, "phase1_step: need at least one worker");

  std::vector<Gradient> shard_grads(static_cast<size_t>(w_count));
  std::vector<double> shard_loss(static_cast<size_t>(w_count), 0.0);
  std::vector<double> shard_acc(static_cast<size_t>(w_count), 0.0);

  pool.parallel_for(w_count, [&](int w) {
    Batch shard = gather(data, plan.shard_indices(sb, w_count, w));
    LossGrad lg = loss_and_grad(workers[static_cast<size_t>(w)].model, spec, shard,
                                &shard_acc[static_cast<size_t>(w)]);
    shard_grads[static_cast<size_t>(w)] = std::move(lg.grad);
    shard_loss[static_cast<size_t>(w)] = lg.loss;
  });

  // All-reduce, simulated: shards are summed in worker-id order regardless of
  // completion order, then divided by W once.
  Gradient consensus = std::move(shard_grads[0]);
  for (int w = 1; w < w_count; ++w) {
    const auto& g = shard_grads[static_cast<size_t>(w)];
    for (size_t t = 0; t < consensus.params.size(); ++t) {
      auto& dst = consensus.params[t].data;
      const auto& src = g.params[t].data;
      for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
  if (w_count > 1) {
    double inv = 1.0 / static_cast<double>(w_count);
    for (auto& t : consensus.params) {
      for (auto& v : t.data) v *= inv;
    }
  }

  for (auto& worker : workers) sgd_update_inplace(worker.model, worker.opt, consensus, lr, cfg);

  uint64_t ref = workers.front().model.checksum();
  for (const auto& worker : workers) {
    if (worker.model.checksum() != ref)
      throw IntegrityError("phase1_step: replica divergence detected at worker " +
                           std::to_string(worker.worker_id));
  }

  if (stats) {
    double loss = 0.0, acc = 0.0;
    for (int w = 0; w < w_count; ++w) {
      loss += shard_loss[static_cast<size_t>(w)];
      acc += shard_acc[static_cast<size_t>(w)];
    }
    stats->batch_loss = loss / w_count;  // equal shards: mean of means
    stats->batch_acc = acc / w_count;
  }
  if (consensus_out) *consensus_out = std::move(consensus);
}

Phase1Result run_phase1(const WeightVector& init, const ModelSpec& spec, const PhasePlan& plan,
                        const ScheduleSpec& lr1, const Dataset& train, const Dataset* test,
                        const OptimizerConfig& cfg, uint64_t master_seed, ThreadPool& pool,
                        RunHistory* history, TraceCapture* trace, int test_eval_every) {
  plan.validate();
  check(plan.b1 <= static_cast<int>(train.size()),
        "phase_plan: b1 exceeds training set size");

  Phase1Result result;
  result.model = init;
  if (plan.max_epochs_phase1 == 0) {
    result.exit_reason = Phase1Exit::kExitMaxEpochs;
    return result;
  }

  std::vector<WorkerState> workers;
  workers.reserve(static_cast<size_t>(plan.workers));
  for (int w = 0; w < plan.workers; ++w) {
    WorkerState ws;
    ws.worker_id = w;
    ws.rng = RngStream(master_seed, "phase1/worker/" + std::to_string(w));
    ws.model = init;
    ws.opt = make_optimizer_state(init);
    workers.push_back(std::move(ws));
  }

  RngStream data_stream(master_seed, "phase1/data");
  int steps_per_epoch = static_cast<int>(train.size()) / plan.b1;
  check(steps_per_epoch >= 1, "phase 1: dataset smaller than one super-batch");

  long t = 0;
  for (int epoch = 0;; ++epoch) {
    BatchPlan plan_e = epoch_batches(train, plan.b1, data_stream);
    double acc_sum = 0.0;
    for (int sb = 0; sb < steps_per_epoch; ++sb) {
      double lr = lr_at(lr1, static_cast<double>(t) / steps_per_epoch);
      bool snap = trace && sb == steps_per_epoch - 1;
      TraceSnapshot snapshot;
      if (snap) {
        snapshot.phase = 1;
        snapshot.epoch = epoch;
        snapshot.step = t + 1;
        snapshot.theta = workers.front().model;
      }
      StepStats stats;
      Gradient consensus;
      try {
        phase1_step(workers, spec, train, plan_e, sb, lr, cfg, pool, &stats,
                    snap ? &consensus : nullptr);
      } catch (const NumericError& e) {
        throw NumericError("phase 1 diverged at step " + std::to_string(t + 1) + ": " +
                           e.what());
      }
      if (!std::isfinite(stats.batch_loss))
        throw NumericError("phase 1 diverged at step " + std::to_string(t + 1));
      ++t;
      acc_sum += stats.batch_acc;
      if (snap) {
        snapshot.grad = std::move(consensus);
        trace->snapshots.push_back(std::move(snapshot));
      }
      if (history) {
        HistoryRecord rec;
        rec.phase = 1;
        rec.step = t;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.batch_loss = stats.batch_loss;
        rec.batch_acc = stats.batch_acc;
        history->append(std::move(rec));
      }
    }

    double epoch_train_acc = acc_sum / steps_per_epoch;
    result.final_train_acc = epoch_train_acc;
    Phase1Exit exit = phase1_exit_check(epoch_train_acc, plan, epoch);

    if (history) {
      auto& row = history->records.back();
      row.epoch_train_acc = epoch_train_acc;
      bool sampled = exit != Phase1Exit::kContinue ||
                     (test_eval_every > 0 && (epoch + 1) % test_eval_every == 0);
      if (test && sampled)
        row.test_acc_model = test_accuracy(workers.front().model, spec, train, *test);
    }

    if (exit != Phase1Exit::kContinue) {
      result.exit_reason = exit;
      result.epochs = epoch + 1;
      break;
    }
  }

  result.steps = t;
  result.model = std::move(workers.front().model);
  if (history) history->phase1_end_step = t;
  return result;
}

std::vector<WeightVector> run_phase2(const WeightVector& start, const ModelSpec& spec,
                                     const PhasePlan& plan, const ScheduleSpec& lr2,
                                     const Dataset& train, const Dataset* test,
                                     const OptimizerConfig& cfg, uint64_t master_seed,
                                     ThreadPool& pool, RunHistory* history,
                                     const Phase2Options& opts, TraceCapture* trace) {
  plan.validate();
  check(plan.b2 <= static_cast<int>(train.size()),
        "phase_plan: b2 exceeds training set size");

  int w_count = plan.workers;
  std::vector<WorkerState> workers;
  workers.reserve(static_cast<size_t>(w_count));
  for (int w = 0; w < w_count; ++w) {
    WorkerState ws;
    ws.worker_id = w;
    int stream_id = opts.force_identical_streams ? 0 : w;
    ws.rng = RngStream(master_seed, "phase2/worker/" + std::to_string(stream_id));
    ws.model = start;
    ws.opt = make_optimizer_state(start);  // fresh zero momentum at the boundary
    workers.push_back(std::move(ws));
  }

  int n = static_cast<int>(train.size());
  int spe = (n + plan.b2 - 1) / plan.b2;  // partial trailing batch kept

  std::vector<EpochStats> epoch_stats(static_cast<size_t>(w_count));
  std::vector<TraceSnapshot> snap_slots(static_cast<size_t>(w_count));

  for (int epoch = 0; epoch < plan.epochs_phase2; ++epoch) {
    pool.parallel_for(w_count, [&](int w) {
      auto& ws = workers[static_cast<size_t>(w)];
      TraceSnapshot* snap = (trace && w == 0) ? &snap_slots[0] : nullptr;
      long step_base = opts.step_offset + static_cast<long>(epoch) * spe;
      epoch_stats[static_cast<size_t>(w)] =
          run_worker_epoch(ws, spec, train, plan.b2, lr2, epoch, cfg, snap, step_base);
    });

    if (trace) {
      snap_slots[0].phase = 2;
      trace->snapshots.push_back(snap_slots[0]);
    }

    if (history) {
      HistoryRecord rec;
      rec.phase = 2;
      rec.step = opts.step_offset + static_cast<long>(epoch + 1) * spe;
      rec.epoch = epoch;
      rec.lr = lr_at(lr2, static_cast<double>(epoch));
      double loss = 0.0, acc = 0.0;
      for (const auto& es : epoch_stats) {
        loss += es.mean_loss;
        acc += es.mean_acc;
      }
      rec.batch_loss = loss / w_count;
      rec.batch_acc = acc / w_count;
      rec.epoch_train_acc = acc / w_count;

      if (test) {
        bool final_epoch = epoch == plan.epochs_phase2 - 1;
        bool sample_workers =
            final_epoch ||
            (opts.worker_eval_every > 0 && (epoch + 1) % opts.worker_eval_every == 0);
        WeightVector averaged;
        if (opts.record_avg_curve) {
          std::vector<WeightVector> models;
          models.reserve(static_cast<size_t>(w_count));
          for (const auto& ws : workers) models.push_back(ws.model);
          averaged = average_weights(models);
        }
        if (sample_workers) rec.worker_test_acc.assign(static_cast<size_t>(w_count), 0.0);
        // Worker evals plus (last slot) the averaged-model eval; all pure.
        int tasks = (sample_workers ? w_count : 0) + (opts.record_avg_curve ? 1 : 0);
        double avg_acc = NAN;
        pool.parallel_for(tasks, [&](int i) {
          if (sample_workers && i < w_count) {
            rec.worker_test_acc[static_cast<size_t>(i)] =
                test_accuracy(workers[static_cast<size_t>(i)].model, spec, train, *test);
          } else {
            avg_acc = test_accuracy(averaged, spec, train, *test);
          }
        });
        rec.test_acc_avg_model = avg_acc;
      }
      history->append(std::move(rec));
    }
  }

  std::vector<WeightVector> models;
  models.reserve(static_cast<size_t>(w_count));
  for (auto& ws : workers) models.push_back(std::move(ws.model));
  return models;
}

WeightVector run_phase2_single_worker(const WeightVector& start, const ModelSpec& spec,
                                      const PhasePlan& plan, const ScheduleSpec& lr2,
                                      const Dataset& train, const OptimizerConfig& cfg,
                                      uint64_t master_seed, int worker_id) {
  WorkerState ws;
  ws.worker_id = worker_id;
  ws.rng = RngStream(master_seed, "phase2/worker/" + std::to_string(worker_id));
  ws.model = start;
  ws.opt = make_optimizer_state(start);
  for (int epoch = 0; epoch < plan.epochs_phase2; ++epoch)
    run_worker_epoch(ws, spec, train, plan.b2, lr2, epoch, cfg, nullptr, 0);
  return std::move(ws.model);
}

WeightVector phase3_average(const std::vector<WeightVector>& models, const ModelSpec& spec,
                            const Dataset& train_data) {
  check(!models.empty(), "phase3_average: need at least one model");
  WeightVector averaged = average_weights(models);  // checks layouts match
  return recompute_bn_stats(averaged, spec, train_data);
}

}  // namespace swaplab
