// SPDX-License-Identifier: Apache-2.0
#include "swaplab/swa.hpp"

#include <sstream>

#include "swaplab/error.hpp"
#include "swaplab/network.hpp"
#include "swaplab/util.hpp"

namespace swaplab {

SwaVariant swa_variant_from_string(const std::string& s) {
  if (s == "large_batch_swa") return SwaVariant::kLargeBatchSwa;
  if (s == "lb_then_sb_swa") return SwaVariant::kLbThenSbSwa;
  if (s == "small_batch_swa") return SwaVariant::kSmallBatchSwa;
  throw ParseError("unknown swa variant: " + s);
}

std::string to_string(SwaVariant v) {
  switch (v) {
    case SwaVariant::kLargeBatchSwa: return "large_batch_swa";
    case SwaVariant::kLbThenSbSwa: return "lb_then_sb_swa";
    case SwaVariant::kSmallBatchSwa: return "small_batch_swa";
  }
  return "?";
}

void SwaPlan::validate() const {
  check(cycles >= 1, "swa: cycles must be >= 1");
  check(cycle_epochs >= 1, "swa: cycle_epochs must be >= 1");
  check(samples_per_cycle >= 1, "swa: samples_per_cycle must be >= 1");
  check(cycle_epochs % samples_per_cycle == 0,
        "swa: cycle_epochs must be divisible by samples_per_cycle");
  bool large = variant == SwaVariant::kLargeBatchSwa;
  check((large ? lb_batch : sb_batch) >= 1,
        large ? "swa: lb_batch must be >= 1" : "swa: sb_batch must be >= 1");
}

SwaResult swa_run(const WeightVector& start, const ModelSpec& spec, const SwaPlan& plan,
                  const ScheduleSpec& cyclic, const Dataset& train, const Dataset* test,
                  const OptimizerConfig& cfg, uint64_t master_seed, ThreadPool& pool,
                  RunHistory* prefix_history, long step_offset) {
  (void)pool;  // training is strictly sequential by definition of the baseline
  plan.validate();
  check(cyclic.kind == ScheduleSpec::Kind::kCyclic, "swa: schedule must be cyclic");
  check(cyclic.cycles == plan.cycles, "swa: schedule cycles must equal plan cycles");

  int batch = plan.variant == SwaVariant::kLargeBatchSwa ? plan.lb_batch : plan.sb_batch;
  check(batch <= static_cast<int>(train.size()), "swa: batch exceeds training set size");

  SwaResult result;
  RunHistory local;
  RunHistory& history = prefix_history ? *prefix_history : local;

  WorkerState ws;
  ws.worker_id = 0;
  ws.rng = RngStream(master_seed, "swa/data");
  ws.model = start;
  ws.opt = make_optimizer_state(start);

  int n = static_cast<int>(train.size());
  int spe = (n + batch - 1) / batch;  // trailing partial batch kept
  int epochs_per_sample = plan.cycle_epochs / plan.samples_per_cycle;
  int total_epochs = plan.cycles * plan.cycle_epochs;

  for (int epoch = 0; epoch < total_epochs; ++epoch) {
    BatchPlan bp = epoch_batches(train, batch, ws.rng);
    double loss_sum = 0.0, acc_sum = 0.0;
    int nb = bp.batch_count();
    for (int b = 0; b < nb; ++b) {
      double lr = lr_at(cyclic, static_cast<double>(epoch) +
                                    static_cast<double>(b) / static_cast<double>(nb));
      Batch mb = gather(train, bp.batch_indices(b));
      double acc = 0.0;
      LossGrad lg;
      try {
        lg = loss_and_grad(ws.model, spec, mb, &acc);
      } catch (const NumericError& e) {
        throw NumericError("swa diverged in cycle " + std::to_string(epoch / plan.cycle_epochs) +
                           " epoch " + std::to_string(epoch) + ": " + e.what());
      }
      sgd_update_inplace(ws.model, ws.opt, lg.grad, lr, cfg);
      loss_sum += lg.loss;
      acc_sum += acc;
    }

    HistoryRecord rec;
    rec.phase = 2;
    rec.step = step_offset + static_cast<long>(epoch + 1) * spe;
    rec.epoch = epoch;
    rec.lr = lr_at(cyclic, static_cast<double>(epoch));
    rec.batch_loss = loss_sum / nb;
    rec.batch_acc = acc_sum / nb;
    rec.epoch_train_acc = acc_sum / nb;

    // Snapshot at the end of each sub-segment (the lowest-LR point).
    if ((epoch + 1) % epochs_per_sample == 0) {
      result.samples.push_back(ws.model);
      if (test) rec.test_acc_model = [&] {
        WeightVector fresh = recompute_bn_stats(ws.model, spec, train);
        return evaluate(fresh, spec, *test).accuracy;
      }();
    }
    history.append(std::move(rec));
  }

  result.averaged = phase3_average(result.samples, spec, train);
  HistoryRecord final_rec;
  final_rec.phase = 3;
  final_rec.step = history.last_step() + 1;
  final_rec.epoch = 0;
  final_rec.lr = 0.0;
  if (test) final_rec.test_acc_avg_model = evaluate(result.averaged, spec, *test).accuracy;
  history.append(std::move(final_rec));

  if (!prefix_history) result.history = std::move(local);
  return result;
}

std::string CompareReport::to_text() const {
  std::ostringstream os;
  os << "method            samples  acc_before_avg  acc_after_avg  wall_clock_s\n";
  for (const auto& r : rows) {
    os << r.method;
    for (size_t i = r.method.size(); i < 18; ++i) os << ' ';
    std::string samples = std::to_string(r.sample_count);
    os << samples;
    for (size_t i = samples.size(); i < 9; ++i) os << ' ';
    std::string before = std::isnan(r.before_avg_acc) ? "-" : fmt_double(r.before_avg_acc);
    os << before;
    for (size_t i = before.size(); i < 16; ++i) os << ' ';
    std::string after = std::isnan(r.after_avg_acc) ? "-" : fmt_double(r.after_avg_acc);
    os << after;
    for (size_t i = after.size(); i < 15; ++i) os << ' ';
    os << fmt_double(r.wall_clock_s) << "\n";
  }
  return os.str();
}

void CompareReport::write_csv(std::ostream& out) const {
  out << "method,sample_count,acc_before_avg,acc_after_avg,wall_clock_s\n";
  for (const auto& r : rows) {
    out << r.method << "," << r.sample_count << ",";
    if (!std::isnan(r.before_avg_acc)) out << fmt_double(r.before_avg_acc);
    out << ",";
    if (!std::isnan(r.after_avg_acc)) out << fmt_double(r.after_avg_acc);
    out << "," << fmt_double(r.wall_clock_s) << "\n";
  }
}

CompareReport swa_vs_swap_report(const RunSummary& swa, const RunSummary& swap) {
  check(swa.model_fingerprint == swap.model_fingerprint,
        "compare: runs use different model specs");
  check(swa.data_fingerprint == swap.data_fingerprint,
        "compare: runs use different datasets");
  check(swa.sample_count == swap.sample_count,
        "compare: model-sample counts differ (" + std::to_string(swa.sample_count) + " vs " +
            std::to_string(swap.sample_count) + "); matched counts are required");
  CompareReport report;
  report.rows = {swa, swap};
  return report;
}

}  // namespace swaplab
