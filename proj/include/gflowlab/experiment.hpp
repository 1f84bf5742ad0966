// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration and the command implementations behind the
// gflow-lab executable.
//
// Config files are flat `key = value` lines with `#` comments. Unknown keys
// are rejected. See configs/ for the shipped defaults.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gflowlab/exact_eval.hpp"
#include "gflowlab/theory.hpp"
#include "gflowlab/trainer.hpp"

namespace gflowlab {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitRuntimeError = 2,
  kExitCertificationFailure = 3,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MaskComparison : std::uint8_t { kBoth, kMaskedOnly, kUnmaskedOnly };

struct ExperimentConfig {
  TrainConfig train;  // mask and loss are filled in per cell
  std::string modes = "nine";
  std::vector<Parametrization> losses{Parametrization::kTB, Parametrization::kDB, Parametrization::kFLDB};
  MaskComparison comparison = MaskComparison::kBoth;
  int hidden_count = 48;
  std::uint64_t mask_seed = 0;
  HidingMode mask_mode = HidingMode::kSkipTrajectory;
  bool mask_exclude_modes = false;
  std::optional<int> length_threshold;
  std::string output_dir;  // empty: $GFLOW_LAB_OUT, then "gflow-lab-out"

  /// Sets one key; throws ConfigError for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  /// Applies `key=value` or `key = value`.
  void apply_override(std::string_view assignment);
  /// Grid with resolved mode regions; throws ConfigError.
  GridSpec grid() const;
  std::filesystem::path output_path() const;
  /// The random-count mask, or the length mask when a threshold is set.
  HidingMask mask() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

struct SweepCell {
  Parametrization loss = Parametrization::kTB;
  bool masked = false;
  std::vector<TrainingTrace> traces;  // seed order

  /// Seed mean of the last recorded JSD.
  double final_mean_jsd() const;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  HidingMask mask;

  const SweepCell& cell(Parametrization loss, bool masked) const;
  bool any_aborted() const;
};

/// Runs every (loss, masked) cell over all seeds, up to train.jobs at a time.
SweepResult run_sweep(const ExperimentConfig& config);

/// curves.csv: loss,masked,seed,iteration,jsd,train_loss
void write_curves_csv(std::ostream& out, const SweepResult& result);
/// summary.csv: loss,masked,iteration,mean_jsd,mean_train_loss,seeds
void write_summary_csv(std::ostream& out, const SweepResult& result);

struct LengthRun {
  Parametrization loss = Parametrization::kDB;
  std::vector<TrainingTrace> traces;
  TerminalDistribution mean_distribution;  // seed mean of the exact learned distributions
  double hidden_mass = 0.0;                // learned mass on hidden states
  double ideal_hidden_mass = 0.0;          // R/Z mass on hidden states
  int hidden_mode_cells = 0;
  int reconstructed_mode_cells = 0;        // learned >= 50% of R(x)/Z
};

struct LengthResult {
  HidingMask mask;
  TerminalDistribution target;
  std::vector<LengthRun> runs;
};

LengthResult run_length(const ExperimentConfig& config);

/// Parses a custom DAG: `states N`, `edge FROM TO`, `reward STATE VALUE`
/// lines; `#` comments. Every terminal state needs a reward.
std::pair<PointedDag, RewardTable> parse_dag_file(std::istream& in);

struct CertifyOptions {
  CertificationConfig config;
  std::optional<std::filesystem::path> dag_file;
  std::optional<std::filesystem::path> output_dir;
};

void write_certification_table(std::ostream& out, const std::vector<SuiteResult>& suites);
/// check,lhs,rhs,slack,witness,pass with one row per individual report.
void write_certification_csv(std::ostream& out, const std::vector<SuiteResult>& suites);

int cmd_sweep(const ExperimentConfig& config, std::ostream& log);
int cmd_length(const ExperimentConfig& config, std::ostream& log);
int cmd_certify(const CertifyOptions& options, std::ostream& log);
int cmd_eval(const std::filesystem::path& checkpoint, const std::optional<std::filesystem::path>& output_dir,
             std::ostream& log);

}  // namespace gflowlab
