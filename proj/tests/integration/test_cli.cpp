// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the swaplab binary: artifact layout, determinism of
// repeated invocations, error reporting and exit codes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "test_util.hpp"

#ifndef SWAPLAB_BIN
#define SWAPLAB_BIN "swaplab"
#endif
#ifndef SWAPLAB_PRESET_DIR
#define SWAPLAB_PRESET_DIR "presets"
#endif

using json = nlohmann::json;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;
};

CmdResult run_cmd(const std::string& args, const std::string& log_path,
                  const std::string& env = "") {
  std::string cmd = env + " " + std::string(SWAPLAB_BIN) + " " + args + " > " + log_path +
                    " 2>&1";
  int status = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = testutil::read_file(log_path);
  return r;
}

std::string small_swap_config(const testutil::TmpDir& tmp) {
  json cfg = {
      {"model", {{"layer_sizes", {3, 12, 3}}, {"use_batchnorm", true}, {"activation", "relu"}}},
      {"data",
       {{"kind", "gaussian_blobs"},
        {"n_train", 192},
        {"n_test", 96},
        {"dim", 3},
        {"classes", 3},
        {"noise", 1.6},
        {"seed", 4}}},
      {"optimizer", {{"momentum", 0.9}, {"weight_decay", 0.0005}}},
      {"phase_plan",
       {{"tau", 0.9},
        {"max_epochs_phase1", 4},
        {"epochs_phase2", 3},
        {"b1", 48},
        {"b2", 12},
        {"workers", 4}}},
      {"schedules",
       {{"lr1", {{"kind", "piecewise_linear"}, {"knots", {{0, 0.0}, {1, 0.3}, {4, 0.05}}}}},
        {"lr2", {{"kind", "piecewise_linear"}, {"knots", {{0, 0.08}, {3, 0.05}}}}},
        {"cyclic",
         {{"kind", "cyclic"},
          {"cycle_length_epochs", 3},
          {"lr_peak", 0.08},
          {"lr_min", 0.008},
          {"cycles", 4}}}}},
      {"swa",
       {{"variant", "lb_then_sb_swa"},
        {"cycles", 4},
        {"cycle_epochs", 3},
        {"lb_batch", 48},
        {"sb_batch", 12}}},
      {"seed", 7},
  };
  std::string path = tmp.file("cfg.json");
  testutil::write_file(path, cfg.dump(2));
  return path;
}

bool same_bytes(const std::string& a, const std::string& b) {
  std::string fa = testutil::read_file(a);
  std::string fb = testutil::read_file(b);
  return !fa.empty() && fa == fb;
}

}  // namespace

TEST_CASE("train swap produces the full artifact set") {
  testutil::TmpDir tmp("swaplab-cli-train");
  std::string cfg = small_swap_config(tmp);
  CmdResult r = run_cmd("train swap --config " + cfg + " --out " + tmp.file("run"),
                        tmp.file("log.txt"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("after averaging") != std::string::npos);
  CHECK(r.output.find("before averaging") != std::string::npos);

  for (const char* rel :
       {"config_echo.json", "history.csv", "history.json", "summary.json", "data/train.csv",
        "data/test.csv", "checkpoints/phase1.ckpt", "checkpoints/worker_0.ckpt",
        "checkpoints/worker_3.ckpt", "checkpoints/final.ckpt"}) {
    CAPTURE(rel);
    CHECK(!testutil::read_file(tmp.file("run/" + std::string(rel))).empty());
  }

  json summary = json::parse(testutil::read_file(tmp.file("run/summary.json")));
  CHECK(summary["mode"] == "swap");
  CHECK(summary["sample_count"] == 4);
  CHECK(summary.contains("test_acc_before_averaging"));
  CHECK(summary.contains("test_acc_after_averaging"));
  CHECK(summary["wall_clock"].contains("total_s"));

  // Config echo parses back to the same normalized form.
  json echo = json::parse(testutil::read_file(tmp.file("run/config_echo.json")));
  CHECK(echo["phase_plan"]["workers"] == 4);
  CHECK(echo["seed"] == 7);
  CHECK_FALSE(echo.contains("out"));  // dispositions stay outside the echo
}

TEST_CASE("identical single-threaded invocations are byte-identical") {
  testutil::TmpDir tmp("swaplab-cli-det");
  std::string cfg = small_swap_config(tmp);
  CmdResult a = run_cmd("train swap --config " + cfg + " --single-thread --out " +
                            tmp.file("a"),
                        tmp.file("log_a.txt"));
  CmdResult b = run_cmd("train swap --config " + cfg + " --single-thread --out " +
                            tmp.file("b"),
                        tmp.file("log_b.txt"));
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  for (const char* rel : {"history.csv", "history.json", "config_echo.json",
                          "data/train.csv", "data/test.csv", "checkpoints/phase1.ckpt",
                          "checkpoints/worker_0.ckpt", "checkpoints/final.ckpt"}) {
    CAPTURE(rel);
    CHECK(same_bytes(tmp.file("a/" + std::string(rel)), tmp.file("b/" + std::string(rel))));
  }
  // A different seed changes the history.
  CmdResult c = run_cmd("train swap --config " + cfg + " --single-thread --seed 99 --out " +
                            tmp.file("c"),
                        tmp.file("log_c.txt"));
  REQUIRE(c.exit_code == 0);
  CHECK_FALSE(same_bytes(tmp.file("a/history.csv"), tmp.file("c/history.csv")));
}

TEST_CASE("sgd_small rejects multi-worker configs with a field-path message") {
  testutil::TmpDir tmp("swaplab-cli-sgdsmall");
  json cfg = json::parse(testutil::read_file(small_swap_config(tmp)));
  cfg["sgd"] = {{"batch", 12},
                {"epochs", 2},
                {"workers", 2},
                {"schedule", {{"kind", "piecewise_linear"}, {"knots", {{0, 0.1}, {2, 0.0}}}}}};
  testutil::write_file(tmp.file("sgd.json"), cfg.dump());
  CmdResult r = run_cmd("train sgd_small --config " + tmp.file("sgd.json") + " --out " +
                            tmp.file("run"),
                        tmp.file("log.txt"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("sgd.workers") != std::string::npos);

  cfg["sgd"]["workers"] = 1;
  testutil::write_file(tmp.file("sgd1.json"), cfg.dump());
  CmdResult ok = run_cmd("train sgd_small --config " + tmp.file("sgd1.json") + " --out " +
                             tmp.file("run1"),
                         tmp.file("log1.txt"));
  CHECK(ok.exit_code == 0);
  CHECK(!testutil::read_file(tmp.file("run1/checkpoints/final.ckpt")).empty());
}

TEST_CASE("train swa produces snapshots and an averaged final model") {
  testutil::TmpDir tmp("swaplab-cli-swa");
  std::string cfg = small_swap_config(tmp);
  CmdResult r = run_cmd("train swa --config " + cfg + " --out " + tmp.file("run"),
                        tmp.file("log.txt"));
  REQUIRE(r.exit_code == 0);
  for (int i = 0; i < 4; ++i)
    CHECK(!testutil::read_file(tmp.file("run/checkpoints/snapshot_" + std::to_string(i) +
                                        ".ckpt"))
               .empty());
  json summary = json::parse(testutil::read_file(tmp.file("run/summary.json")));
  CHECK(summary["mode"] == "swa");
  CHECK(summary["sample_count"] == 4);
}

TEST_CASE("landscape marks LB/SGD/SWAP/BEST and rejects duplicate checkpoints") {
  testutil::TmpDir tmp("swaplab-cli-landscape");
  std::string cfg = small_swap_config(tmp);
  REQUIRE(run_cmd("train swap --config " + cfg + " --out " + tmp.file("run"),
                  tmp.file("log.txt"))
              .exit_code == 0);

  std::string ckpts = " --checkpoint " + tmp.file("run/checkpoints/phase1.ckpt") +
                      " --checkpoint " + tmp.file("run/checkpoints/worker_0.ckpt") +
                      " --checkpoint " + tmp.file("run/checkpoints/final.ckpt");
  CmdResult r = run_cmd("landscape" + ckpts + " --train " + tmp.file("run/data/train.csv") +
                            " --test " + tmp.file("run/data/test.csv") +
                            " --resolution 5 --out " + tmp.file("surface"),
                        tmp.file("log2.txt"));
  REQUIRE(r.exit_code == 0);

  std::string surface = testutil::read_file(tmp.file("surface/surface.csv"));
  CHECK(!surface.empty());
  // 5x5 grid plus a header line.
  CHECK(std::count(surface.begin(), surface.end(), '\n') == 26);
  json manifest = json::parse(testutil::read_file(tmp.file("surface/surface_manifest.json")));
  REQUIRE(manifest["marked_points"].size() == 4);
  CHECK(manifest["marked_points"][0]["label"] == "LB");
  CHECK(manifest["marked_points"][1]["label"] == "SGD");
  CHECK(manifest["marked_points"][2]["label"] == "SWAP");
  CHECK(manifest["marked_points"][3]["label"] == "BEST");

  // Duplicate checkpoint -> degenerate plane -> nonzero exit.
  std::string dup = " --checkpoint " + tmp.file("run/checkpoints/phase1.ckpt") +
                    " --checkpoint " + tmp.file("run/checkpoints/phase1.ckpt") +
                    " --checkpoint " + tmp.file("run/checkpoints/final.ckpt");
  CmdResult bad = run_cmd("landscape" + dup + " --train " + tmp.file("run/data/train.csv") +
                              " --test " + tmp.file("run/data/test.csv") + " --out " +
                              tmp.file("surface2"),
                          tmp.file("log3.txt"));
  CHECK(bad.exit_code != 0);
  CHECK(bad.output.find("degenerate") != std::string::npos);
}

TEST_CASE("diag emits a cosine trace") {
  testutil::TmpDir tmp("swaplab-cli-diag");
  std::string cfg = small_swap_config(tmp);
  CmdResult r = run_cmd("diag --config " + cfg + " --out " + tmp.file("run"),
                        tmp.file("log.txt"));
  REQUIRE(r.exit_code == 0);
  std::string trace = testutil::read_file(tmp.file("run/trace.csv"));
  REQUIRE(!trace.empty());
  // Header + one snapshot per epoch (4 phase-1 cap, 3 phase-2).
  long rows = std::count(trace.begin(), trace.end(), '\n') - 1;
  CHECK(rows >= 4);
  CHECK(trace.rfind("phase,step,epoch,cosine,defined", 0) == 0);
  json manifest = json::parse(testutil::read_file(tmp.file("run/trace_manifest.json")));
  CHECK(manifest["snapshots"] == rows);
}

TEST_CASE("compare: run dir against itself gives equal columns; missing dir fails") {
  testutil::TmpDir tmp("swaplab-cli-compare");
  std::string cfg = small_swap_config(tmp);
  REQUIRE(run_cmd("train swap --config " + cfg + " --out " + tmp.file("run"),
                  tmp.file("log.txt"))
              .exit_code == 0);

  CmdResult r = run_cmd("compare --swa " + tmp.file("run") + " --swap " + tmp.file("run") +
                            " --out " + tmp.file("cmp"),
                        tmp.file("log2.txt"));
  REQUIRE(r.exit_code == 0);
  std::string csv = testutil::read_file(tmp.file("cmp/compare.csv"));
  REQUIRE(!csv.empty());
  // Two data rows with identical columns.
  auto first_nl = csv.find('\n');
  auto second_nl = csv.find('\n', first_nl + 1);
  std::string row1 = csv.substr(first_nl + 1, second_nl - first_nl - 1);
  std::string row2 = csv.substr(second_nl + 1);
  if (!row2.empty() && row2.back() == '\n') row2.pop_back();
  CHECK(row1 == row2);
  CHECK(!testutil::read_file(tmp.file("cmp/compare.txt")).empty());

  // Byte-identical regeneration from the same inputs.
  CmdResult again = run_cmd("compare --swa " + tmp.file("run") + " --swap " + tmp.file("run") +
                                " --out " + tmp.file("cmp2"),
                            tmp.file("log3.txt"));
  REQUIRE(again.exit_code == 0);
  CHECK(same_bytes(tmp.file("cmp/compare.csv"), tmp.file("cmp2/compare.csv")));

  CmdResult missing = run_cmd("compare --swa " + tmp.file("nope") + " --swap " +
                                  tmp.file("run") + " --out " + tmp.file("cmp3"),
                              tmp.file("log4.txt"));
  CHECK(missing.exit_code != 0);
  CHECK(missing.output.find("nope") != std::string::npos);
}

TEST_CASE("compare rejects mismatched sample counts") {
  testutil::TmpDir tmp("swaplab-cli-mismatch");
  std::string cfg = small_swap_config(tmp);
  REQUIRE(run_cmd("train swap --config " + cfg + " --out " + tmp.file("swap_run"),
                  tmp.file("log.txt"))
              .exit_code == 0);
  // SWA with 3 cycles -> 3 samples vs swap's 4 workers.
  CmdResult swa = run_cmd("train swa --config " + cfg +
                              " --override swa.cycles=3 --override schedules.cyclic.cycles=3"
                              " --out " +
                              tmp.file("swa_run"),
                          tmp.file("log2.txt"));
  REQUIRE(swa.exit_code == 0);
  CmdResult r = run_cmd("compare --swa " + tmp.file("swa_run") + " --swap " +
                            tmp.file("swap_run") + " --out " + tmp.file("cmp"),
                        tmp.file("log3.txt"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("sample counts") != std::string::npos);
}

TEST_CASE("config errors produce exit code 2 with a useful message") {
  testutil::TmpDir tmp("swaplab-cli-badcfg");
  CmdResult missing = run_cmd("train swap --config " + tmp.file("absent.json"),
                              tmp.file("log.txt"));
  CHECK(missing.exit_code == 2);

  testutil::write_file(tmp.file("broken.json"), "{not json");
  CmdResult broken = run_cmd("train swap --config " + tmp.file("broken.json"),
                             tmp.file("log2.txt"));
  CHECK(broken.exit_code == 2);
  CHECK(broken.output.find("malformed") != std::string::npos);

  json cfg = json::parse(testutil::read_file(small_swap_config(tmp)));
  cfg["phase_plan"]["b1"] = 50;  // not divisible by workers=4
  testutil::write_file(tmp.file("bad_plan.json"), cfg.dump());
  CmdResult bad = run_cmd("train swap --config " + tmp.file("bad_plan.json"),
                          tmp.file("log3.txt"));
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("divisible") != std::string::npos);
}

TEST_CASE("SWAPLAB_OUT prefixes relative output directories") {
  testutil::TmpDir tmp("swaplab-cli-outroot");
  std::string cfg = small_swap_config(tmp);
  CmdResult r = run_cmd("train swap --config " + cfg + " --out nested/run",
                        tmp.file("log.txt"), "SWAPLAB_OUT=" + tmp.path.string());
  REQUIRE(r.exit_code == 0);
  CHECK(!testutil::read_file(tmp.file("nested/run/summary.json")).empty());
}

TEST_CASE("the table-shaped preset parses and runs at toy scale") {
  testutil::TmpDir tmp("swaplab-cli-preset");
  CmdResult r = run_cmd("train swap --config " + std::string(SWAPLAB_PRESET_DIR) +
                            "/cifar10-shape.toy.json --out " + tmp.file("run"),
                        tmp.file("log.txt"));
  REQUIRE(r.exit_code == 0);
  json summary = json::parse(testutil::read_file(tmp.file("run/summary.json")));
  CHECK(summary["sample_count"] == 8);
  CHECK(summary.contains("test_acc_before_averaging"));
  CHECK(summary.contains("test_acc_after_averaging"));
  json echo = json::parse(testutil::read_file(tmp.file("run/config_echo.json")));
  CHECK(echo["phase_plan"]["b1"] == 4096);
  CHECK(echo["phase_plan"]["b2"] == 512);
  CHECK(echo["phase_plan"]["workers"] == 8);
  CHECK(echo["phase_plan"]["tau"] == 0.98);
}
