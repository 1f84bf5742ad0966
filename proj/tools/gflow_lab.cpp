// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gflowlab/experiment.hpp"

namespace {

using gflowlab::ConfigError;
using gflowlab::ExperimentConfig;

std::optional<ExperimentConfig> build_config(const std::string& file, const std::vector<std::string>& overrides,
                                             std::optional<int> jobs) {
  try {
    ExperimentConfig cfg = file.empty() ? ExperimentConfig{} : gflowlab::load_config(file);
    for (const auto& o : overrides) cfg.apply_override(o);
    if (jobs) cfg.set("jobs", std::to_string(*jobs));
    return cfg;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gflow-lab: train and audit flow networks on small DAGs"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<int> jobs;

  auto* sweep = app.add_subcommand("sweep", "masked vs unmasked comparison of TB, DB and FL-DB");
  sweep->add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
  sweep->add_option("--jobs", jobs, "parallel training runs");
  sweep->add_option("overrides", overrides, "key=value overrides");

  auto* length = app.add_subcommand("length", "train with long terminal states hidden");
  length->add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
  length->add_option("--jobs", jobs, "parallel training runs");
  length->add_option("overrides", overrides, "key=value overrides");

  gflowlab::CertifyOptions certify_opts;
  std::string dag_file;
  std::string certify_out;
  auto* certify = app.add_subcommand("certify", "check the stability and generalization bounds exactly");
  certify->add_option("--grid", certify_opts.config.grid_side, "grid side (2 to 5)")->capture_default_str();
  certify->add_option("--perturbations", certify_opts.config.perturbations, "reward perturbations")
      ->capture_default_str();
  certify->add_option("--epsilon", certify_opts.config.epsilon, "perturbation size")->capture_default_str();
  certify->add_option("--trials", certify_opts.config.lemma_trials, "randomized instances per inequality")
      ->capture_default_str();
  certify->add_option("--seed", certify_opts.config.seed, "random seed")->capture_default_str();
  certify->add_option("--dag", dag_file, "custom DAG file instead of the grid")->check(CLI::ExistingFile);
  certify->add_option("--out", certify_out, "directory for certify.csv");
  certify->add_flag("--inject-bug", certify_opts.config.inject_bug, "mis-scale the TV bound (self-test)");

  std::string checkpoint;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "recompute JSD and heatmaps from a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "directory for the heatmap files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gflowlab::kExitConfigError;
  }

  if (sweep->parsed() || length->parsed()) {
    const auto cfg = build_config(config_file, overrides, jobs);
    if (!cfg) return gflowlab::kExitConfigError;
    return sweep->parsed() ? gflowlab::cmd_sweep(*cfg, std::cout) : gflowlab::cmd_length(*cfg, std::cout);
  }
  if (certify->parsed()) {
    certify_opts.config.iid_trials = certify_opts.config.lemma_trials;
    if (!dag_file.empty()) certify_opts.dag_file = dag_file;
    if (!certify_out.empty()) certify_opts.output_dir = certify_out;
    return gflowlab::cmd_certify(certify_opts, std::cout);
  }
  std::optional<std::filesystem::path> out;
  if (!eval_out.empty()) out = eval_out;
  return gflowlab::cmd_eval(checkpoint, out, std::cout);
}
