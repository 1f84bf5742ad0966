// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// On-policy training: each step samples trajectories from the current forward
// policy, computes the chosen objective on a fresh tape and applies one
// optimizer update. Masked steps are skipped but still count as iterations.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gflowlab/exact_eval.hpp"
#include "gflowlab/hypergrid.hpp"
#include "gflowlab/policy.hpp"
#include "gflowlab/random.hpp"

namespace gflowlab {

enum class OptimizerKind : std::uint8_t { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;        // network weights
  double log_z_learning_rate = 1e-1;  // the log Z scalar
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SGD (theta -= lr g) or Adam with bias correction; per-parameter learning
/// rates taken from the slice layout.
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& config, const PolicyParams& params);

  /// Throws NonFiniteError, leaving the parameters untouched, if g has a
  /// non-finite entry.
  void step(std::span<double> params, std::span<const double> grad);
  std::size_t steps() const { return steps_; }

 private:
  OptimizerConfig config_;
  std::vector<double> rates_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t steps_ = 0;
};

/// Counts reward lookups per state. Training reads rewards only through this.
class RewardAccess {
 public:
  explicit RewardAccess(const RewardTable& table) : table_(&table), reads_(table.size(), 0) {}
  double operator()(StateId s) {
    ++reads_.at(s);
    return table_->at(s);
  }
  const std::vector<std::uint64_t>& reads() const { return reads_; }

 private:
  const RewardTable* table_;
  std::vector<std::uint64_t> reads_;
};

struct TrainConfig {
  GridSpec grid;
  Parametrization loss = Parametrization::kTB;
  HidingMask mask;  // empty vector means no hiding
  OptimizerConfig optimizer;
  int iterations = 2000;
  int batch_size = 1;
  std::vector<std::uint64_t> seeds{0};
  int eval_every = 50;
  double epsilon_uniform = 0.0;
  int hidden_width = 64;
  Encoding encoding = Encoding::kOneHot;
  bool learned_backward = false;
  bool store_trajectories = false;
  int jobs = 1;

  void validate() const;
  PolicyConfig policy_config() const;
};

struct TraceRecord {
  int iteration = 0;
  double train_loss = 0.0;  // running mean of per-step losses; NaN before the first update
  double jsd = 0.0;
  double wall_seconds = 0.0;
};

struct TrainingTrace {
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
  std::size_t updates = 0;
  std::size_t skipped = 0;
  std::optional<std::string> abort_reason;
  std::optional<int> abort_iteration;
  PolicyParams final_params;
  std::vector<Trajectory> trained_trajectories;  // only with store_trajectories
  std::vector<std::uint64_t> reward_reads;        // per state id, training only
};

/// Starts at the source and follows categorical draws from P_F, replaced by a
/// uniform valid action with probability epsilon_uniform at each step.
Trajectory sample_trajectory(const PolicyParams& params, const PointedDag& dag, Rng& rng,
                             double epsilon_uniform = 0.0);

/// Trains one run per seed; traces are returned in seed order.
std::vector<TrainingTrace> train(const TrainConfig& config);
TrainingTrace train_seed(const TrainConfig& config, std::uint64_t seed);

/// (1/n) sum_i L(tau_i; theta_n): the loss of every trained trajectory
/// re-evaluated under the final parameters. Needs store_trajectories.
double posthoc_training_loss(const TrainConfig& config, const TrainingTrace& trace);

/// JSD between the exact terminal distribution of `params` and R/Z.
double exact_jsd(const PolicyParams& params, const PointedDag& dag, const TerminalDistribution& target);

}  // namespace gflowlab
