// SPDX-License-Identifier: Apache-2.0
#include "swaplab/config.hpp"

#include <charconv>
#include <fstream>

#include "swaplab/error.hpp"

namespace swaplab {

using json = nlohmann::json;

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "sgd_small") return TrainMode::kSgdSmall;
  if (s == "sgd_large") return TrainMode::kSgdLarge;
  if (s == "swap") return TrainMode::kSwap;
  if (s == "swa") return TrainMode::kSwa;
  throw ParseError("unknown train mode: " + s + " (expected sgd_small|sgd_large|swap|swa)");
}

std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::kSgdSmall: return "sgd_small";
    case TrainMode::kSgdLarge: return "sgd_large";
    case TrainMode::kSwap: return "swap";
    case TrainMode::kSwa: return "swa";
  }
  return "?";
}

namespace {

const json& require(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError("config: missing field " + path + key);
  return *it;
}

template <typename T>
T field(const json& j, const std::string& key, const std::string& path) {
  try {
    return require(j, key, path).get<T>();
  } catch (const json::exception& e) {
    throw ParseError("config: field " + path + key + ": " + e.what());
  }
}

template <typename T>
T field_or(const json& j, const std::string& key, const std::string& path, T def) {
  if (!j.contains(key)) return def;
  return field<T>(j, key, path);
}

ScheduleSpec schedule_from_json(const json& j, const std::string& path) {
  ScheduleSpec s;
  std::string kind = field<std::string>(j, "kind", path);
  try {
    if (kind == "piecewise_linear") {
      s.kind = ScheduleSpec::Kind::kPiecewiseLinear;
      for (const auto& knot : require(j, "knots", path)) {
        if (!knot.is_array() || knot.size() != 2)
          throw ParseError("config: " + path + "knots: each knot must be [position, lr]");
        s.knots.emplace_back(knot[0].get<double>(), knot[1].get<double>());
      }
    } else if (kind == "cyclic") {
      s.kind = ScheduleSpec::Kind::kCyclic;
      s.cycle_length_epochs = field<double>(j, "cycle_length_epochs", path);
      s.lr_peak = field<double>(j, "lr_peak", path);
      s.lr_min = field<double>(j, "lr_min", path);
      s.cycles = field<int>(j, "cycles", path);
    } else {
      throw ParseError("config: " + path + "kind: expected piecewise_linear or cyclic");
    }
    s.validate();
  } catch (const ContractError& e) {
    throw ParseError("config: " + path.substr(0, path.size() - 1) + ": " + e.what());
  }
  return s;
}

json schedule_to_json(const ScheduleSpec& s) {
  json j;
  if (s.kind == ScheduleSpec::Kind::kPiecewiseLinear) {
    j["kind"] = "piecewise_linear";
    json knots = json::array();
    for (const auto& [pos, lr] : s.knots) knots.push_back(json::array({pos, lr}));
    j["knots"] = std::move(knots);
  } else {
    j["kind"] = "cyclic";
    j["cycle_length_epochs"] = s.cycle_length_epochs;
    j["lr_peak"] = s.lr_peak;
    j["lr_min"] = s.lr_min;
    j["cycles"] = s.cycles;
  }
  return j;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig cfg;

  const json& jm = require(j, "model", "");
  cfg.model.layer_sizes = field<std::vector<int>>(jm, "layer_sizes", "model.");
  if (jm.contains("use_batchnorm")) {
    const auto& bn = jm["use_batchnorm"];
    size_t hidden = cfg.model.layer_sizes.size() >= 2 ? cfg.model.layer_sizes.size() - 2 : 0;
    if (bn.is_boolean()) {
      cfg.model.use_batchnorm.assign(hidden, bn.get<bool>() ? 1 : 0);
    } else {
      auto flags = field<std::vector<bool>>(jm, "use_batchnorm", "model.");
      cfg.model.use_batchnorm.assign(flags.begin(), flags.end());
    }
  } else {
    cfg.model.use_batchnorm.assign(
        cfg.model.layer_sizes.size() >= 2 ? cfg.model.layer_sizes.size() - 2 : 0, 0);
  }
  cfg.model.activation =
      activation_from_string(field_or<std::string>(jm, "activation", "model.", "relu"));
  try {
    cfg.model.validate();
  } catch (const ContractError& e) {
    throw ParseError(std::string("config: model: ") + e.what());
  }

  const json& jd = require(j, "data", "");
  cfg.data.kind = field<std::string>(jd, "kind", "data.");
  if (cfg.data.kind == "gaussian_blobs" || cfg.data.kind == "two_spirals") {
    cfg.data.n_train = field<int>(jd, "n_train", "data.");
    cfg.data.n_test = field<int>(jd, "n_test", "data.");
    cfg.data.dim = field_or<int>(jd, "dim", "data.", 2);
    cfg.data.classes = field_or<int>(jd, "classes", "data.", 2);
    cfg.data.noise = field<double>(jd, "noise", "data.");
    cfg.data.seed = field<uint64_t>(jd, "seed", "data.");
  } else if (cfg.data.kind == "csv") {
    cfg.data.train_path = field<std::string>(jd, "train_path", "data.");
    cfg.data.test_path = field<std::string>(jd, "test_path", "data.");
  } else if (cfg.data.kind == "idx") {
    cfg.data.train_images = field<std::string>(jd, "train_images", "data.");
    cfg.data.train_labels = field<std::string>(jd, "train_labels", "data.");
    cfg.data.test_images = field<std::string>(jd, "test_images", "data.");
    cfg.data.test_labels = field<std::string>(jd, "test_labels", "data.");
  } else {
    throw ParseError("config: data.kind: expected gaussian_blobs|two_spirals|csv|idx");
  }
  cfg.data.standardize = field_or<bool>(jd, "standardize", "data.", false);

  const json& jo = require(j, "optimizer", "");
  cfg.optimizer.momentum = field_or<double>(jo, "momentum", "optimizer.", 0.9);
  cfg.optimizer.weight_decay = field_or<double>(jo, "weight_decay", "optimizer.", 0.0);
  cfg.optimizer.nesterov = field_or<bool>(jo, "nesterov", "optimizer.", true);
  cfg.optimizer.decay_bn_params = field_or<bool>(jo, "decay_bn_params", "optimizer.", false);
  try {
    cfg.optimizer.validate();
  } catch (const ContractError& e) {
    throw ParseError(std::string("config: optimizer: ") + e.what());
  }

  if (j.contains("phase_plan")) {
    const json& jp = j["phase_plan"];
    cfg.phase_plan.tau = field<double>(jp, "tau", "phase_plan.");
    cfg.phase_plan.max_epochs_phase1 = field<int>(jp, "max_epochs_phase1", "phase_plan.");
    cfg.phase_plan.epochs_phase2 = field<int>(jp, "epochs_phase2", "phase_plan.");
    cfg.phase_plan.b1 = field<int>(jp, "b1", "phase_plan.");
    cfg.phase_plan.b2 = field<int>(jp, "b2", "phase_plan.");
    cfg.phase_plan.workers = field<int>(jp, "workers", "phase_plan.");
    try {
      cfg.phase_plan.validate();
    } catch (const ContractError& e) {
      throw ParseError(std::string("config: phase_plan: ") + e.what());
    }
    cfg.has_phase_plan = true;
  }

  if (j.contains("schedules")) {
    const json& js = j["schedules"];
    if (js.contains("lr1")) cfg.lr1 = schedule_from_json(js["lr1"], "schedules.lr1.");
    if (js.contains("lr2")) cfg.lr2 = schedule_from_json(js["lr2"], "schedules.lr2.");
    if (js.contains("cyclic"))
      cfg.cyclic = schedule_from_json(js["cyclic"], "schedules.cyclic.");
  }

  if (j.contains("swa")) {
    const json& jw = j["swa"];
    SwaPlan plan;
    plan.variant = swa_variant_from_string(field<std::string>(jw, "variant", "swa."));
    plan.cycles = field<int>(jw, "cycles", "swa.");
    plan.cycle_epochs = field<int>(jw, "cycle_epochs", "swa.");
    plan.samples_per_cycle = field_or<int>(jw, "samples_per_cycle", "swa.", 1);
    plan.lb_batch = field_or<int>(jw, "lb_batch", "swa.", 0);
    plan.sb_batch = field_or<int>(jw, "sb_batch", "swa.", 0);
    try {
      plan.validate();
    } catch (const ContractError& e) {
      throw ParseError(std::string("config: swa: ") + e.what());
    }
    cfg.swa = plan;
  }

  if (j.contains("sgd")) {
    const json& jg = j["sgd"];
    SgdConfig sgd;
    sgd.batch = field<int>(jg, "batch", "sgd.");
    sgd.epochs = field<int>(jg, "epochs", "sgd.");
    sgd.workers = field_or<int>(jg, "workers", "sgd.", 1);
    sgd.stop_accuracy = field_or<double>(jg, "stop_accuracy", "sgd.", 1.0);
    sgd.schedule = schedule_from_json(require(jg, "schedule", "sgd."), "sgd.schedule.");
    if (sgd.batch < 1) throw ParseError("config: sgd.batch must be >= 1");
    if (sgd.epochs < 1) throw ParseError("config: sgd.epochs must be >= 1");
    if (sgd.workers < 1) throw ParseError("config: sgd.workers must be >= 1");
    if (sgd.batch % sgd.workers != 0)
      throw ParseError("config: sgd.batch must be divisible by sgd.workers");
    if (sgd.stop_accuracy < 0.0 || sgd.stop_accuracy > 1.0)
      throw ParseError("config: sgd.stop_accuracy must be in [0,1]");
    cfg.sgd = sgd;
  }

  if (j.contains("logging")) {
    cfg.eval_every = field_or<int>(j["logging"], "eval_every", "logging.", 0);
    if (cfg.eval_every < 0) throw ParseError("config: logging.eval_every must be >= 0");
  }

  cfg.seed = field_or<uint64_t>(j, "seed", "", 0);
  cfg.threads = field_or<int>(j, "threads", "", 0);
  cfg.out_dir = field_or<std::string>(j, "out", "", "run");
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(path + ": malformed json");
  return from_json(j);
}

json RunConfig::to_json() const {
  json j;
  j["model"]["layer_sizes"] = model.layer_sizes;
  j["model"]["use_batchnorm"] =
      std::vector<bool>(model.use_batchnorm.begin(), model.use_batchnorm.end());
  j["model"]["activation"] = swaplab::to_string(model.activation);

  json& jd = j["data"];
  jd["kind"] = data.kind;
  if (data.kind == "gaussian_blobs" || data.kind == "two_spirals") {
    jd["n_train"] = data.n_train;
    jd["n_test"] = data.n_test;
    jd["dim"] = data.dim;
    jd["classes"] = data.classes;
    jd["noise"] = data.noise;
    jd["seed"] = data.seed;
  } else if (data.kind == "csv") {
    jd["train_path"] = data.train_path;
    jd["test_path"] = data.test_path;
  } else {
    jd["train_images"] = data.train_images;
    jd["train_labels"] = data.train_labels;
    jd["test_images"] = data.test_images;
    jd["test_labels"] = data.test_labels;
  }
  jd["standardize"] = data.standardize;

  j["optimizer"]["momentum"] = optimizer.momentum;
  j["optimizer"]["weight_decay"] = optimizer.weight_decay;
  j["optimizer"]["nesterov"] = optimizer.nesterov;
  j["optimizer"]["decay_bn_params"] = optimizer.decay_bn_params;

  if (has_phase_plan) {
    j["phase_plan"]["tau"] = phase_plan.tau;
    j["phase_plan"]["max_epochs_phase1"] = phase_plan.max_epochs_phase1;
    j["phase_plan"]["epochs_phase2"] = phase_plan.epochs_phase2;
    j["phase_plan"]["b1"] = phase_plan.b1;
    j["phase_plan"]["b2"] = phase_plan.b2;
    j["phase_plan"]["workers"] = phase_plan.workers;
  }
  if (lr1) j["schedules"]["lr1"] = schedule_to_json(*lr1);
  if (lr2) j["schedules"]["lr2"] = schedule_to_json(*lr2);
  if (cyclic) j["schedules"]["cyclic"] = schedule_to_json(*cyclic);
  if (swa) {
    j["swa"]["variant"] = swaplab::to_string(swa->variant);
    j["swa"]["cycles"] = swa->cycles;
    j["swa"]["cycle_epochs"] = swa->cycle_epochs;
    j["swa"]["samples_per_cycle"] = swa->samples_per_cycle;
    j["swa"]["lb_batch"] = swa->lb_batch;
    j["swa"]["sb_batch"] = swa->sb_batch;
  }
  if (sgd) {
    j["sgd"]["batch"] = sgd->batch;
    j["sgd"]["epochs"] = sgd->epochs;
    j["sgd"]["workers"] = sgd->workers;
    j["sgd"]["stop_accuracy"] = sgd->stop_accuracy;
    j["sgd"]["schedule"] = schedule_to_json(sgd->schedule);
  }
  // The echo covers the experiment-defining fields only; the output
  // directory and thread cap are runtime dispositions that cannot change
  // results, so they stay out of the reproducibility envelope.
  j["logging"]["eval_every"] = eval_every;
  j["seed"] = seed;
  return j;
}

void RunConfig::validate(TrainMode mode) const {
  switch (mode) {
    case TrainMode::kSwap:
      check(has_phase_plan, "config: swap mode requires a phase_plan section");
      check(lr1.has_value(), "config: swap mode requires schedules.lr1");
      check(lr2.has_value(), "config: swap mode requires schedules.lr2");
      break;
    case TrainMode::kSwa:
      check(swa.has_value(), "config: swa mode requires a swa section");
      check(cyclic.has_value(), "config: swa mode requires schedules.cyclic");
      check(cyclic->cycles == swa->cycles,
            "config: schedules.cyclic.cycles must equal swa.cycles");
      if (swa->variant == SwaVariant::kLbThenSbSwa) {
        check(has_phase_plan,
              "config: swa variant lb_then_sb_swa requires a phase_plan section");
        check(lr1.has_value(), "config: swa variant lb_then_sb_swa requires schedules.lr1");
      }
      break;
    case TrainMode::kSgdSmall:
      check(sgd.has_value(), "config: sgd_small mode requires an sgd section");
      check(sgd->workers == 1, "config: sgd.workers must be 1 for mode sgd_small");
      break;
    case TrainMode::kSgdLarge:
      check(sgd.has_value(), "config: sgd_large mode requires an sgd section");
      break;
  }
  check(threads >= 0, "config: threads must be >= 0");
}

void RunConfig::validate_with_data(TrainMode mode, const Dataset& train,
                                   const Dataset& test) const {
  int n = static_cast<int>(train.size());
  check(train.dim() == model.input_dim(),
        "config: model.layer_sizes[0] (" + std::to_string(model.input_dim()) +
            ") must equal the data dimension (" + std::to_string(train.dim()) + ")");
  check(train.class_count == model.num_classes(),
        "config: model output size (" + std::to_string(model.num_classes()) +
            ") must equal the class count (" + std::to_string(train.class_count) + ")");
  check(test.dim() == train.dim(), "config: train/test dimension mismatch");
  check(test.class_count <= train.class_count, "config: test labels exceed train classes");

  auto check_small_batch = [&](int batch, const std::string& where) {
    check(batch <= n, "config: " + where + " exceeds the training set size");
    if (model.has_batchnorm() && n % batch == 1)
      throw ContractError("config: " + where + " leaves a trailing batch of one sample, "
                          "which train-mode batch norm rejects; adjust " + where +
                          " or n_train");
  };

  if (mode == TrainMode::kSwap || (swa && swa->variant == SwaVariant::kLbThenSbSwa &&
                                   mode == TrainMode::kSwa)) {
    check(phase_plan.b1 <= n, "config: phase_plan.b1 exceeds the training set size");
  }
  if (mode == TrainMode::kSwap) check_small_batch(phase_plan.b2, "phase_plan.b2");
  if (mode == TrainMode::kSwa) {
    int batch = swa->variant == SwaVariant::kLargeBatchSwa ? swa->lb_batch : swa->sb_batch;
    check_small_batch(batch, "swa cycle batch");
  }
  if (mode == TrainMode::kSgdSmall || mode == TrainMode::kSgdLarge)
    check_small_batch(sgd->batch, "sgd.batch");
}

std::string RunConfig::model_fingerprint() const {
  json j;
  j["layer_sizes"] = model.layer_sizes;
  j["use_batchnorm"] =
      std::vector<bool>(model.use_batchnorm.begin(), model.use_batchnorm.end());
  j["activation"] = swaplab::to_string(model.activation);
  return j.dump();
}

std::string RunConfig::data_fingerprint() const {
  return to_json()["data"].dump();
}

void apply_override(json& j, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ParseError("override must look like path.to.field=value: " + assignment);
  std::string path = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);

  json* node = &j;
  size_t begin = 0;
  for (;;) {
    size_t dot = path.find('.', begin);
    std::string key = path.substr(begin, dot == std::string::npos ? dot : dot - begin);
    if (key.empty()) throw ParseError("override: empty path segment in " + path);
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    begin = dot + 1;
  }
}

}  // namespace swaplab
