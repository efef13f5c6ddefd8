// SPDX-License-Identifier: Apache-2.0
#include "swaplab/history.hpp"

#include "swaplab/error.hpp"
#include "swaplab/util.hpp"

namespace swaplab {

void RunHistory::append(HistoryRecord rec) {
  check(rec.phase >= 1 && rec.phase <= 3, "history: phase must be 1, 2 or 3");
  if (!records.empty())
    check(rec.step > records.back().step, "history: steps must be strictly increasing");
  records.push_back(std::move(rec));
}

namespace {

void put_cell(std::ostream& out, double v) {
  if (!std::isnan(v)) out << fmt_double(v);
}

}  // namespace

void RunHistory::write_csv(std::ostream& out, int worker_count) const {
  out << "phase,step,epoch,lr,batch_loss,batch_acc,epoch_train_acc,test_acc_model,"
         "test_acc_avg_model";
  for (int w = 0; w < worker_count; ++w) out << ",test_acc_worker_" << w;
  out << "\n";
  for (const auto& r : records) {
    out << r.phase << "," << r.step << "," << r.epoch << "," << fmt_double(r.lr) << ",";
    put_cell(out, r.batch_loss);
    out << ",";
    put_cell(out, r.batch_acc);
    out << ",";
    put_cell(out, r.epoch_train_acc);
    out << ",";
    put_cell(out, r.test_acc_model);
    out << ",";
    put_cell(out, r.test_acc_avg_model);
    for (int w = 0; w < worker_count; ++w) {
      out << ",";
      if (static_cast<size_t>(w) < r.worker_test_acc.size())
        put_cell(out, r.worker_test_acc[static_cast<size_t>(w)]);
    }
    out << "\n";
  }
}

nlohmann::json RunHistory::to_json(int worker_count) const {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json j;
    j["phase"] = r.phase;
    j["step"] = r.step;
    j["epoch"] = r.epoch;
    j["lr"] = r.lr;
    if (!std::isnan(r.batch_loss)) j["batch_loss"] = r.batch_loss;
    if (!std::isnan(r.batch_acc)) j["batch_acc"] = r.batch_acc;
    if (!std::isnan(r.epoch_train_acc)) j["epoch_train_acc"] = r.epoch_train_acc;
    if (!std::isnan(r.test_acc_model)) j["test_acc_model"] = r.test_acc_model;
    if (!std::isnan(r.test_acc_avg_model)) j["test_acc_avg_model"] = r.test_acc_avg_model;
    if (!r.worker_test_acc.empty()) j["worker_test_acc"] = r.worker_test_acc;
    recs.push_back(std::move(j));
  }
  nlohmann::json out;
  out["worker_count"] = worker_count;
  out["phase1_end_step"] = phase1_end_step;
  out["records"] = std::move(recs);
  return out;
}

}  // namespace swaplab
