// SPDX-License-Identifier: Apache-2.0
#include "swaplab/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "swaplab/checkpoint.hpp"
#include "swaplab/error.hpp"
#include "swaplab/network.hpp"

namespace swaplab {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double fresh_test_acc(const WeightVector& model, const ModelSpec& spec, const Dataset& train,
                      const Dataset& test) {
  WeightVector fresh = recompute_bn_stats(model, spec, train);
  return evaluate(fresh, spec, test).accuracy;
}

void save_model_checkpoint(const WeightVector& model, const ModelSpec& spec,
                           const std::string& path, std::map<std::string, std::string> meta) {
  Checkpoint ckpt;
  ckpt.spec = spec;
  ckpt.weights = model;
  ckpt.meta = std::move(meta);
  save_checkpoint(ckpt, path);
}

}  // namespace

PreparedData build_dataset(const RunConfig& cfg) {
  PreparedData out;
  const DataConfig& d = cfg.data;
  if (d.kind == "gaussian_blobs" || d.kind == "two_spirals") {
    SyntheticKind kind = synthetic_kind_from_string(d.kind);
    // Train and test come from one deterministic draw: first n_train samples
    // train, the rest are the held-out split.
    check(d.n_train >= 1 && d.n_test >= 1, "config: data.n_train and data.n_test must be >= 1");
    Dataset all = generate_synthetic(kind, d.n_train + d.n_test, d.dim, d.classes, d.noise,
                                     d.seed);
    std::vector<int> idx_train(static_cast<size_t>(d.n_train));
    for (int i = 0; i < d.n_train; ++i) idx_train[static_cast<size_t>(i)] = i;
    std::vector<int> idx_test(static_cast<size_t>(d.n_test));
    for (int i = 0; i < d.n_test; ++i) idx_test[static_cast<size_t>(i)] = d.n_train + i;

    auto take = [&](const std::vector<int>& idx) {
      Dataset ds;
      Batch b = gather(all, idx);
      ds.features = std::move(b.inputs);
      ds.labels = std::move(b.labels);
      ds.class_count = all.class_count;
      ds.provenance = all.provenance;
      return ds;
    };
    out.train = take(idx_train);
    out.test = take(idx_test);
    out.train.provenance.detail += ",split=train";
    out.test.provenance.detail += ",split=test";
  } else if (d.kind == "csv") {
    out.train = load_csv(d.train_path);
    CsvSchema test_schema;
    test_schema.class_count = out.train.class_count;
    out.test = load_csv(d.test_path, test_schema);
  } else if (d.kind == "idx") {
    out.train = load_idx(d.train_images, d.train_labels);
    out.test = load_idx(d.test_images, d.test_labels);
    out.test.class_count = out.train.class_count;
  } else {
    throw ParseError("config: data.kind: unknown kind " + d.kind);
  }
  if (d.standardize) standardize_features(out.train, &out.test);
  out.train.validate();
  out.test.validate();
  return out;
}

TrainOutcome run_experiment(const RunConfig& cfg, TrainMode mode, const PreparedData& data,
                            ThreadPool& pool, TraceCapture* trace) {
  cfg.validate(mode);
  cfg.validate_with_data(mode, data.train, data.test);

  TrainOutcome out;
  out.mode = mode;
  out.spec = cfg.model;
  out.summary.method = to_string(mode);
  out.summary.model_fingerprint = cfg.model_fingerprint();
  out.summary.data_fingerprint = cfg.data_fingerprint();

  RngStream init_stream(cfg.seed, "init");
  WeightVector init = init_weights(cfg.model, init_stream);

  auto t_start = std::chrono::steady_clock::now();

  if (mode == TrainMode::kSwap) {
    auto t0 = std::chrono::steady_clock::now();
    Phase1Result p1 = run_phase1(init, cfg.model, cfg.phase_plan, *cfg.lr1, data.train,
                                 &data.test, cfg.optimizer, cfg.seed, pool, &out.history,
                                 trace, cfg.eval_every);
    out.history.timing.phase1_s = seconds_since(t0);
    out.phase1_model = p1.model;

    auto t1 = std::chrono::steady_clock::now();
    Phase2Options opts;
    opts.step_offset = p1.steps;
    opts.worker_eval_every = cfg.eval_every;
    out.models = run_phase2(p1.model, cfg.model, cfg.phase_plan, *cfg.lr2, data.train,
                            &data.test, cfg.optimizer, cfg.seed, pool, &out.history, opts,
                            trace);
    out.history.timing.phase2_s = seconds_since(t1);

    auto t2 = std::chrono::steady_clock::now();
    out.final_model = phase3_average(out.models, cfg.model, data.train);
    double final_acc = evaluate(out.final_model, cfg.model, data.test).accuracy;
    out.history.timing.phase3_s = seconds_since(t2);

    HistoryRecord rec;
    rec.phase = 3;
    rec.step = out.history.last_step() + 1;
    rec.epoch = 0;
    rec.lr = 0.0;
    rec.test_acc_avg_model = final_acc;
    out.history.append(std::move(rec));

    double before = 0.0;
    for (const auto& m : out.models)
      before += fresh_test_acc(m, cfg.model, data.train, data.test);
    out.summary.before_avg_acc = before / static_cast<double>(out.models.size());
    out.summary.after_avg_acc = final_acc;
    out.summary.sample_count = static_cast<int>(out.models.size());
  } else if (mode == TrainMode::kSwa) {
    const SwaPlan& plan = *cfg.swa;
    WeightVector start = init;
    long step_offset = 0;
    auto t0 = std::chrono::steady_clock::now();
    if (plan.variant == SwaVariant::kLbThenSbSwa) {
      Phase1Result p1 = run_phase1(init, cfg.model, cfg.phase_plan, *cfg.lr1, data.train,
                                   &data.test, cfg.optimizer, cfg.seed, pool, &out.history,
                                   nullptr, cfg.eval_every);
      start = std::move(p1.model);
      step_offset = p1.steps;
      out.phase1_model = start;
    }
    out.history.timing.phase1_s = seconds_since(t0);

    auto t1 = std::chrono::steady_clock::now();
    SwaResult res = swa_run(start, cfg.model, plan, *cfg.cyclic, data.train, &data.test,
                            cfg.optimizer, cfg.seed, pool, &out.history, step_offset);
    out.history.timing.phase2_s = seconds_since(t1);

    out.final_model = std::move(res.averaged);
    out.models = std::move(res.samples);
    out.summary.after_avg_acc = evaluate(out.final_model, cfg.model, data.test).accuracy;
    double before = 0.0;
    for (const auto& m : out.models)
      before += fresh_test_acc(m, cfg.model, data.train, data.test);
    out.summary.before_avg_acc = before / static_cast<double>(out.models.size());
    out.summary.sample_count = static_cast<int>(out.models.size());
  } else {
    // Plain arms reuse the synchronized phase-1 loop: sgd_small is a single
    // worker, sgd_large shards its batch across sgd.workers replicas.
    const SgdConfig& sgd = *cfg.sgd;
    PhasePlan plan;
    plan.tau = sgd.stop_accuracy;
    plan.max_epochs_phase1 = sgd.epochs;
    plan.epochs_phase2 = 1;
    plan.b1 = sgd.batch;
    plan.b2 = 1;
    plan.workers = sgd.workers;

    auto t0 = std::chrono::steady_clock::now();
    Phase1Result p1 = run_phase1(init, cfg.model, plan, sgd.schedule, data.train, &data.test,
                                 cfg.optimizer, cfg.seed, pool, &out.history, trace,
                                 cfg.eval_every);
    out.history.timing.phase1_s = seconds_since(t0);
    out.final_model = recompute_bn_stats(p1.model, cfg.model, data.train);
    out.summary.after_avg_acc = evaluate(out.final_model, cfg.model, data.test).accuracy;
    out.summary.sample_count = 1;
  }

  out.history.timing.total_s = seconds_since(t_start);
  out.summary.wall_clock_s = out.history.timing.total_s;
  return out;
}

void write_run_artifacts(const TrainOutcome& outcome, const RunConfig& cfg,
                         const PreparedData& data, const std::string& out_dir) {
  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/checkpoints");
  fs::create_directories(out_dir + "/data");

  json echo = cfg.to_json();
  {
    std::ofstream f(out_dir + "/config_echo.json", std::ios::binary);
    f << echo.dump(2) << "\n";
  }

  int worker_count = outcome.mode == TrainMode::kSwap ? cfg.phase_plan.workers : 0;
  {
    std::ofstream f(out_dir + "/history.csv", std::ios::binary);
    outcome.history.write_csv(f, worker_count);
  }
  {
    json jh = outcome.history.to_json(worker_count);
    jh["config"] = echo;
    std::ofstream f(out_dir + "/history.json", std::ios::binary);
    f << jh.dump(2) << "\n";
  }
  {
    json js;
    js["mode"] = to_string(outcome.mode);
    js["sample_count"] = outcome.summary.sample_count;
    if (!std::isnan(outcome.summary.before_avg_acc))
      js["test_acc_before_averaging"] = outcome.summary.before_avg_acc;
    js["test_acc_after_averaging"] = outcome.summary.after_avg_acc;
    js["model_fingerprint"] = outcome.summary.model_fingerprint;
    js["data_fingerprint"] = outcome.summary.data_fingerprint;
    js["wall_clock"] = {{"phase1_s", outcome.history.timing.phase1_s},
                        {"phase2_s", outcome.history.timing.phase2_s},
                        {"phase3_s", outcome.history.timing.phase3_s},
                        {"total_s", outcome.history.timing.total_s}};
    std::ofstream f(out_dir + "/summary.json", std::ios::binary);
    f << js.dump(2) << "\n";
  }

  save_csv(data.train, out_dir + "/data/train.csv");
  save_csv(data.test, out_dir + "/data/test.csv");

  std::map<std::string, std::string> meta{{"mode", to_string(outcome.mode)},
                                          {"seed", std::to_string(cfg.seed)}};
  if (outcome.phase1_model) {
    auto m = meta;
    m["phase"] = "1";
    save_model_checkpoint(*outcome.phase1_model, outcome.spec,
                          out_dir + "/checkpoints/phase1.ckpt", m);
  }
  for (size_t i = 0; i < outcome.models.size(); ++i) {
    auto m = meta;
    m["phase"] = "2";
    m["index"] = std::to_string(i);
    std::string stem = outcome.mode == TrainMode::kSwa ? "snapshot_" : "worker_";
    save_model_checkpoint(outcome.models[i], outcome.spec,
                          out_dir + "/checkpoints/" + stem + std::to_string(i) + ".ckpt", m);
  }
  {
    auto m = meta;
    m["phase"] = "3";
    save_model_checkpoint(outcome.final_model, outcome.spec,
                          out_dir + "/checkpoints/final.ckpt", m);
  }
}

RunSummary load_run_summary(const std::string& run_dir) {
  std::string path = run_dir + "/summary.json";
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open run summary: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(path + ": malformed json");
  RunSummary s;
  s.method = j.at("mode").get<std::string>();
  s.sample_count = j.at("sample_count").get<int>();
  if (j.contains("test_acc_before_averaging"))
    s.before_avg_acc = j["test_acc_before_averaging"].get<double>();
  s.after_avg_acc = j.at("test_acc_after_averaging").get<double>();
  s.model_fingerprint = j.at("model_fingerprint").get<std::string>();
  s.data_fingerprint = j.at("data_fingerprint").get<std::string>();
  s.wall_clock_s = j.at("wall_clock").at("total_s").get<double>();
  return s;
}

}  // namespace swaplab
