// SPDX-License-Identifier: Apache-2.0
//
// swaplab: desk-scale SWAP / SWA training laboratory.
//
//   swaplab train <sgd_small|sgd_large|swap|swa> --config cfg.json [--seed N]
//           [--threads N | --single-thread] [--out dir] [--override k=v ...]
//   swaplab landscape --checkpoint a.ckpt --checkpoint b.ckpt --checkpoint c.ckpt
//           --train train.csv --test test.csv [--resolution N] [--labels LB,SGD,SWAP]
//           [--alpha-min/--alpha-max/--beta-min/--beta-max] --out dir
//   swaplab diag --config cfg.json [...train flags] --out dir
//   swaplab compare --swa dir --swap dir --out dir
//
// The SWAPLAB_OUT environment variable, when set, prefixes relative output
// directories. Exit codes: 0 success, 2 configuration/validation error,
// 3 runtime error (divergence, integrity).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "swaplab/checkpoint.hpp"
#include "swaplab/diagnostics.hpp"
#include "swaplab/error.hpp"
#include "swaplab/experiment.hpp"
#include "swaplab/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace swaplab;

namespace {

std::string resolve_out(const std::string& out) {
  const char* root = std::getenv("SWAPLAB_OUT");
  if (root && *root && fs::path(out).is_relative()) return (fs::path(root) / out).string();
  return out;
}

struct TrainFlags {
  std::string config_path;
  std::string out_override;
  std::vector<std::string> overrides;
  int64_t seed = -1;
  int threads = -1;
  bool single_thread = false;
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--config", flags.config_path, "run config json")->required();
  cmd->add_option("--seed", flags.seed, "override the master seed");
  cmd->add_option("--threads", flags.threads, "worker thread cap (0 = hardware)");
  cmd->add_flag("--single-thread", flags.single_thread,
                "force the deterministic single-threaded mode");
  cmd->add_option("--out", flags.out_override, "output directory (overrides config)");
  cmd->add_option("--override", flags.overrides,
                  "dotted-path config override, e.g. schedules.cyclic.lr_peak=0.1");
}

RunConfig load_config(const TrainFlags& flags) {
  std::ifstream in(flags.config_path);
  if (!in) throw ParseError("cannot open config: " + flags.config_path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(flags.config_path + ": malformed json");
  for (const auto& ov : flags.overrides) apply_override(j, ov);
  RunConfig cfg = RunConfig::from_json(j);
  if (flags.seed >= 0) cfg.seed = static_cast<uint64_t>(flags.seed);
  if (flags.threads >= 0) cfg.threads = flags.threads;
  if (flags.single_thread) cfg.threads = 1;
  if (!flags.out_override.empty()) cfg.out_dir = flags.out_override;
  cfg.out_dir = resolve_out(cfg.out_dir);
  return cfg;
}

int cmd_train(const TrainFlags& flags, const std::string& mode_name) {
  TrainMode mode = train_mode_from_string(mode_name);
  RunConfig cfg = load_config(flags);
  cfg.validate(mode);

  ThreadPool pool(cfg.threads);
  PreparedData data = build_dataset(cfg);
  TrainOutcome outcome = run_experiment(cfg, mode, data, pool);
  write_run_artifacts(outcome, cfg, data, cfg.out_dir);

  std::cout << "mode: " << to_string(mode) << "\n";
  if (!std::isnan(outcome.summary.before_avg_acc))
    std::cout << "test accuracy before averaging: " << fmt_double(outcome.summary.before_avg_acc)
              << "\n";
  std::cout << "test accuracy after averaging:  " << fmt_double(outcome.summary.after_avg_acc)
            << "\n";
  std::cout << "wall clock (s): phase1 " << fmt_double(outcome.history.timing.phase1_s)
            << ", phase2 " << fmt_double(outcome.history.timing.phase2_s) << ", phase3 "
            << fmt_double(outcome.history.timing.phase3_s) << ", total "
            << fmt_double(outcome.history.timing.total_s) << "\n";
  std::cout << "artifacts: " << cfg.out_dir << "\n";
  return 0;
}

int cmd_diag(const TrainFlags& flags) {
  RunConfig cfg = load_config(flags);
  cfg.validate(TrainMode::kSwap);

  ThreadPool pool(cfg.threads);
  PreparedData data = build_dataset(cfg);
  TraceCapture trace;
  TrainOutcome outcome = run_experiment(cfg, TrainMode::kSwap, data, pool, &trace);
  write_run_artifacts(outcome, cfg, data, cfg.out_dir);

  CosineTrace ct = cosine_trace(trace.snapshots, outcome.final_model);
  {
    std::ofstream f(cfg.out_dir + "/trace.csv", std::ios::binary);
    f << "phase,step,epoch,cosine,defined\n";
    for (const auto& r : ct.records) {
      f << r.phase << "," << r.step << "," << r.epoch << ",";
      if (r.defined) f << fmt_double(r.cosine);
      f << "," << (r.defined ? 1 : 0) << "\n";
    }
  }
  {
    json m;
    m["config"] = cfg.to_json();
    m["snapshots"] = ct.records.size();
    size_t undefined = 0;
    for (const auto& r : ct.records)
      if (!r.defined) ++undefined;
    m["undefined_records"] = undefined;
    m["reference"] = "final averaged model of this run";
    std::ofstream f(cfg.out_dir + "/trace_manifest.json", std::ios::binary);
    f << m.dump(2) << "\n";
  }
  std::cout << "cosine trace records: " << ct.records.size() << "\n";
  std::cout << "artifacts: " << cfg.out_dir << "\n";
  return 0;
}

int cmd_landscape(const std::vector<std::string>& ckpt_paths, const std::string& train_path,
                  const std::string& test_path, int resolution, const std::string& labels_csv,
                  double a_min, double a_max, double b_min, double b_max, int threads,
                  const std::string& out) {
  std::string out_dir = resolve_out(out);
  if (ckpt_paths.size() != 3)
    throw ContractError("landscape: exactly three --checkpoint paths are required");

  std::array<std::string, 3> labels = {"LB", "SGD", "SWAP"};
  if (!labels_csv.empty()) {
    std::stringstream ss(labels_csv);
    std::string item;
    size_t i = 0;
    while (std::getline(ss, item, ',') && i < 3) labels[i++] = item;
    if (i != 3) throw ContractError("landscape: --labels needs three comma-separated names");
  }

  Checkpoint c1 = load_checkpoint(ckpt_paths[0]);
  Checkpoint c2 = load_checkpoint(ckpt_paths[1]);
  Checkpoint c3 = load_checkpoint(ckpt_paths[2]);
  check(c1.weights.same_layout(c2.weights) && c1.weights.same_layout(c3.weights),
        "landscape: checkpoints have incompatible shapes");

  Dataset train = load_csv(train_path);
  CsvSchema schema;
  schema.class_count = train.class_count;
  Dataset test = load_csv(test_path, schema);

  PlaneBasis basis = plane_basis(c1.weights, c2.weights, c3.weights);
  GridSpec grid;
  grid.resolution_alpha = resolution;
  grid.resolution_beta = resolution;
  if (a_max > a_min) grid.alpha_range = {a_min, a_max};
  if (b_max > b_min) grid.beta_range = {b_min, b_max};

  ThreadPool pool(threads);
  SurfaceGrid surface = loss_surface(basis, grid, c1.spec, train, test, labels, pool);

  fs::create_directories(out_dir);
  {
    std::ofstream f(out_dir + "/surface.csv", std::ios::binary);
    f << "alpha,beta,train_error_pct,test_error_pct\n";
    for (size_t r = 0; r < surface.betas.size(); ++r) {
      for (size_t c = 0; c < surface.alphas.size(); ++c) {
        f << fmt_double(surface.alphas[c]) << "," << fmt_double(surface.betas[r]) << ","
          << fmt_double(surface.train_error_pct(r, c)) << ","
          << fmt_double(surface.test_error_pct(r, c)) << "\n";
      }
    }
  }
  {
    json m;
    m["alpha_range"] = {surface.alphas.front(), surface.alphas.back()};
    m["beta_range"] = {surface.betas.front(), surface.betas.back()};
    m["resolution"] = {surface.alphas.size(), surface.betas.size()};
    json marked = json::array();
    for (const auto& p : surface.marked) {
      marked.push_back({{"label", p.label},
                        {"alpha", p.alpha},
                        {"beta", p.beta},
                        {"train_error_pct", p.train_error_pct},
                        {"test_error_pct", p.test_error_pct}});
    }
    m["marked_points"] = std::move(marked);
    json ckpts = json::array();
    for (const auto& p : ckpt_paths)
      ckpts.push_back({{"path", p}, {"hash", hash_hex(hash_file(p))}});
    m["checkpoints"] = std::move(ckpts);
    m["data"] = {{"train", {{"path", train_path}, {"hash", train.provenance.hash_hex}}},
                 {"test", {{"path", test_path}, {"hash", test.provenance.hash_hex}}}};
    std::ofstream f(out_dir + "/surface_manifest.json", std::ios::binary);
    f << m.dump(2) << "\n";
  }
  std::cout << "surface: " << surface.alphas.size() << "x" << surface.betas.size()
            << " grid, marked points:";
  for (const auto& p : surface.marked) std::cout << " " << p.label;
  std::cout << "\nartifacts: " << out_dir << "\n";
  return 0;
}

int cmd_compare(const std::string& swa_dir, const std::string& swap_dir,
                const std::string& out) {
  std::string out_dir = resolve_out(out);
  RunSummary swa = load_run_summary(swa_dir);
  RunSummary swap = load_run_summary(swap_dir);
  CompareReport report = swa_vs_swap_report(swa, swap);

  fs::create_directories(out_dir);
  {
    std::ofstream f(out_dir + "/compare.csv", std::ios::binary);
    report.write_csv(f);
  }
  std::string text = report.to_text();
  {
    std::ofstream f(out_dir + "/compare.txt", std::ios::binary);
    f << text;
  }
  std::cout << text;
  std::cout << "artifacts: " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale SWAP / SWA training laboratory"};
  app.require_subcommand(1);

  // train
  TrainFlags train_flags;
  std::string mode_name;
  auto* train = app.add_subcommand("train", "run a training experiment");
  train->add_option("mode", mode_name, "sgd_small | sgd_large | swap | swa")->required();
  add_train_flags(train, train_flags);

  // landscape
  std::vector<std::string> ckpt_paths;
  std::string train_csv, test_csv, labels_csv, landscape_out = "landscape";
  int resolution = 25, landscape_threads = 0;
  double a_min = 0, a_max = 0, b_min = 0, b_max = 0;
  auto* landscape = app.add_subcommand("landscape", "2D loss surface through 3 checkpoints");
  landscape->add_option("--checkpoint", ckpt_paths, "checkpoint path (three times)")
      ->expected(1, 3);
  landscape->add_option("--train", train_csv, "training split csv")->required();
  landscape->add_option("--test", test_csv, "test split csv")->required();
  landscape->add_option("--resolution", resolution, "grid resolution per axis");
  landscape->add_option("--labels", labels_csv, "labels for the three points, e.g. LB,SGD,SWAP");
  landscape->add_option("--alpha-min", a_min, "explicit alpha range lower bound");
  landscape->add_option("--alpha-max", a_max, "explicit alpha range upper bound");
  landscape->add_option("--beta-min", b_min, "explicit beta range lower bound");
  landscape->add_option("--beta-max", b_max, "explicit beta range upper bound");
  landscape->add_option("--threads", landscape_threads, "thread cap (0 = hardware)");
  landscape->add_option("--out", landscape_out, "output directory");

  // diag
  TrainFlags diag_flags;
  auto* diag = app.add_subcommand("diag", "swap run with a cosine-similarity trace");
  add_train_flags(diag, diag_flags);

  // compare
  std::string swa_dir, swap_dir, compare_out = "compare";
  auto* compare = app.add_subcommand("compare", "SWA vs SWAP report from two run dirs");
  compare->add_option("--swa", swa_dir, "SWA run directory")->required();
  compare->add_option("--swap", swap_dir, "SWAP run directory")->required();
  compare->add_option("--out", compare_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train_flags, mode_name);
    if (landscape->parsed())
      return cmd_landscape(ckpt_paths, train_csv, test_csv, resolution, labels_csv, a_min,
                           a_max, b_min, b_max, landscape_threads, landscape_out);
    if (diag->parsed()) return cmd_diag(diag_flags);
    if (compare->parsed()) return cmd_compare(swa_dir, swap_dir, compare_out);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
