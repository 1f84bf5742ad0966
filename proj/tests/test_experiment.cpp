// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gflowlab/experiment.hpp"

namespace fs = std::filesystem;

namespace gflowlab {
namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "gflow-lab-tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig tiny_config(const fs::path& out) {
  std::istringstream in(
      "grid_side = 8\n"
      "hidden_count = 16\n"
      "iterations = 10\n"
      "eval_every = 5\n"
      "seeds = 0\n"
      "hidden_width = 8\n");
  auto cfg = parse_config(in);
  cfg.output_dir = out.string();
  return cfg;
}

TEST(Config, ParsesCommentsAndBlankLines) {
  std::istringstream in(
      "# header\n"
      "\n"
      "grid_side = 10   # trailing\n"
      "losses = tb, db\n"
      "seeds = 0-3\n"
      "learning_rate = 0.01\n"
      "comparison = masked\n"
      "length_threshold = none\n");
  const auto cfg = parse_config(in);
  EXPECT_EQ(cfg.train.grid.side, 10);
  EXPECT_EQ(cfg.losses, (std::vector<Parametrization>{Parametrization::kTB, Parametrization::kDB}));
  EXPECT_EQ(cfg.train.seeds, (std::vector<std::uint64_t>{0, 1, 2, 3}));
  EXPECT_EQ(cfg.train.optimizer.learning_rate, 0.01);
  EXPECT_EQ(cfg.comparison, MaskComparison::kMaskedOnly);
  EXPECT_FALSE(cfg.length_threshold.has_value());
}

TEST(Config, RejectsUnknownKeyWithLineNumber) {
  std::istringstream in("grid_side = 8\nbogus = 1\n");
  try {
    parse_config(in);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Config, RejectsBadValues) {
  ExperimentConfig cfg;
  EXPECT_THROW(cfg.set("grid_side", "eight"), ConfigError);
  EXPECT_THROW(cfg.set("losses", "tb,xx"), ConfigError);
  EXPECT_THROW(cfg.set("seeds", "3-1"), ConfigError);
  EXPECT_THROW(cfg.set("learned_backward", "maybe"), ConfigError);
  EXPECT_THROW(cfg.apply_override("grid_side"), ConfigError);
  cfg.set("modes", "nine");
  cfg.set("grid_side", "4");
  EXPECT_THROW(cfg.grid(), ConfigError);  // nine modes need side >= 8
}

TEST(Config, OverridesApply) {
  ExperimentConfig cfg;
  cfg.apply_override("iterations=77");
  cfg.apply_override("optimizer = sgd");
  EXPECT_EQ(cfg.train.iterations, 77);
  EXPECT_EQ(cfg.train.optimizer.kind, OptimizerKind::kSgd);
}

TEST(Config, OutputDirectoryFallsBackToEnvironment) {
  ExperimentConfig cfg;
  ::setenv("GFLOW_LAB_OUT", "/tmp/from-env", 1);
  EXPECT_EQ(cfg.output_path(), fs::path("/tmp/from-env"));
  cfg.output_dir = "explicit";
  EXPECT_EQ(cfg.output_path(), fs::path("explicit"));
  ::unsetenv("GFLOW_LAB_OUT");
  cfg.output_dir.clear();
  EXPECT_EQ(cfg.output_path(), fs::path("gflow-lab-out"));
}

TEST(Sweep, SmokeRunWritesExpectedRows) {
  const auto dir = scratch("sweep");
  std::ostringstream log;
  ASSERT_EQ(cmd_sweep(tiny_config(dir), log), kExitOk) << log.str();
  std::istringstream curves(slurp(dir / "curves.csv"));
  std::string line;
  std::getline(curves, line);
  EXPECT_EQ(line, "loss,masked,seed,iteration,jsd,train_loss");
  int rows = 0;
  while (std::getline(curves, line)) ++rows;
  EXPECT_EQ(rows, 3 * 2 * 3);  // losses x {masked, unmasked} x {0, 5, 10}
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "mask.pgm"));
  EXPECT_TRUE(fs::exists(dir / "checkpoints" / "tb_masked_seed0.ckpt"));
}

TEST(Sweep, RerunIsByteIdentical) {
  const auto a = scratch("rerun-a");
  const auto b = scratch("rerun-b");
  std::ostringstream log;
  ASSERT_EQ(cmd_sweep(tiny_config(a), log), kExitOk);
  ASSERT_EQ(cmd_sweep(tiny_config(b), log), kExitOk);
  EXPECT_EQ(slurp(a / "curves.csv"), slurp(b / "curves.csv"));
  EXPECT_EQ(slurp(a / "summary.csv"), slurp(b / "summary.csv"));
}

TEST(Sweep, EvalReproducesTracedJsd) {
  const auto dir = scratch("eval");
  auto cfg = tiny_config(dir);
  const auto result = run_sweep(cfg);
  std::ostringstream log;
  ASSERT_EQ(cmd_sweep(cfg, log), kExitOk);
  const auto& trace = result.cell(Parametrization::kDB, true).traces.at(0);
  std::ostringstream eval_log;
  ASSERT_EQ(cmd_eval(dir / "checkpoints" / "db_masked_seed0.ckpt", dir / "heat", eval_log), kExitOk);
  std::istringstream parsed(eval_log.str());
  std::string key;
  double value = 0.0;
  parsed >> key >> value;
  EXPECT_EQ(key, "jsd");
  EXPECT_NEAR(value, trace.records.back().jsd, 1e-15);
  std::istringstream pgm(slurp(dir / "heat" / "db_masked_seed0.pgm"));
  std::string magic;
  int w = 0, h = 0;
  pgm >> magic >> w >> h;
  EXPECT_EQ(w, 8);
  EXPECT_EQ(h, 8);
}

TEST(Eval, MissingCheckpointIsConfigError) {
  std::ostringstream log;
  EXPECT_EQ(cmd_eval("/nonexistent/x.ckpt", std::nullopt, log), kExitConfigError);
}

TEST(Length, FullThresholdHidesNothing) {
  auto cfg = tiny_config(scratch("length-full"));
  cfg.set("length_threshold", "14");
  cfg.set("losses", "db");
  const auto hidden = cfg.mask().hidden;
  EXPECT_TRUE(std::none_of(hidden.begin(), hidden.end(), [](bool h) { return h; }));
  const auto masked = run_length(cfg);
  cfg.length_threshold.reset();
  cfg.comparison = MaskComparison::kUnmaskedOnly;
  const auto plain = run_sweep(cfg);
  const auto& a = masked.runs.at(0).traces.at(0).records;
  const auto& b = plain.cell(Parametrization::kDB, false).traces.at(0).records;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].jsd, b[i].jsd);
  EXPECT_EQ(masked.runs[0].hidden_mass, 0.0);
}

TEST(Length, ZeroThresholdRuns) {
  const auto dir = scratch("length-zero");
  auto cfg = tiny_config(dir);
  cfg.set("length_threshold", "0");
  cfg.set("losses", "db,fldb");
  std::ostringstream log;
  EXPECT_EQ(cmd_length(cfg, log), kExitOk) << log.str();
  EXPECT_TRUE(fs::exists(dir / "learned_db.csv"));
  EXPECT_TRUE(fs::exists(dir / "learned_fldb_seed0.csv"));
}

TEST(Length, RequiresThreshold) {
  std::ostringstream log;
  EXPECT_EQ(cmd_length(tiny_config(scratch("length-none")), log), kExitConfigError);
}

TEST(Certify, ExitCodes) {
  CertifyOptions ok;
  ok.config.perturbations = 10;
  ok.config.lemma_trials = 50;
  ok.config.iid_trials = 20;
  std::ostringstream log;
  EXPECT_EQ(cmd_certify(ok, log), kExitOk) << log.str();

  auto bug = ok;
  bug.config.inject_bug = true;
  std::ostringstream bug_log;
  EXPECT_EQ(cmd_certify(bug, bug_log), kExitCertificationFailure);
  EXPECT_NE(bug_log.str().find("FAILED tv-lemma"), std::string::npos);

  auto big = ok;
  big.config.grid_side = 9;
  std::ostringstream big_log;
  EXPECT_EQ(cmd_certify(big, big_log), kExitConfigError);
}

TEST(Certify, CustomDagFile) {
  const auto dir = scratch("dag");
  {
    std::ofstream f(dir / "diamond.dag");
    f << "# diamond\nstates 4\nedge 0 1\nedge 0 2\nedge 1 3\nedge 2 3\nreward 1 1.0\nreward 2 3.0\n";
  }
  CertifyOptions opts;
  opts.dag_file = dir / "diamond.dag";
  opts.output_dir = dir / "out";
  opts.config.perturbations = 10;
  opts.config.lemma_trials = 50;
  opts.config.iid_trials = 20;
  std::ostringstream log;
  EXPECT_EQ(cmd_certify(opts, log), kExitOk) << log.str();
  EXPECT_TRUE(fs::exists(dir / "out" / "certify.csv"));
}

TEST(Certify, MalformedDagIsConfigError) {
  std::istringstream in("states 3\nedge 0 5\n");
  EXPECT_THROW(parse_dag_file(in), ConfigError);
  std::istringstream missing("states 3\nedge 0 1\nedge 1 2\n");
  EXPECT_THROW(parse_dag_file(missing), ConfigError);
}

}  // namespace
}  // namespace gflowlab
