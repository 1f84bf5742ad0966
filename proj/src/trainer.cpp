// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "gflowlab/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gflowlab/objectives.hpp"
#include "gflowlab/parallel.hpp"

namespace gflowlab {

Optimizer::Optimizer(const OptimizerConfig& config, const PolicyParams& params)
    : config_(config), rates_(params.size(), config.learning_rate) {
  if (!(config.learning_rate > 0.0) || !(config.log_z_learning_rate > 0.0)) {
    throw std::invalid_argument("learning rates must be positive");
  }
  const auto z = params.slice("log_z");
  rates_[z.offset] = config.log_z_learning_rate;
  if (config.kind == OptimizerKind::kAdam) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  }
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != rates_.size() || grad.size() != rates_.size()) {
    throw std::invalid_argument("gradient is not aligned with the parameters");
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) throw NonFiniteError(fmt::format("non-finite gradient at parameter {}", i));
  }
  ++steps_;
  if (config_.kind == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= rates_[i] * grad[i];
    return;
  }
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
    params[i] -= rates_[i] * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.epsilon);
  }
}

void TrainConfig::validate() const {
  grid.validate();
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("seed list is empty");
  if (eval_every < 1) throw std::invalid_argument("eval cadence must be >= 1");
  if (epsilon_uniform < 0.0 || epsilon_uniform > 1.0) throw std::invalid_argument("epsilon_uniform must be in [0, 1]");
  if (!(optimizer.learning_rate > 0.0) || !(optimizer.log_z_learning_rate > 0.0)) {
    throw std::invalid_argument("learning rates must be positive");
  }
  if (!mask.hidden.empty()) {
    if (mask.hidden.size() != grid.num_grid_states() + 1) throw std::invalid_argument("mask does not match the grid");
    if (mask.is_hidden(0)) throw std::invalid_argument("the source state cannot be hidden");
  }
}

PolicyConfig TrainConfig::policy_config() const {
  return PolicyConfig{grid.side, hidden_width, encoding, loss, learned_backward};
}

Trajectory sample_trajectory(const PolicyParams& params, const PointedDag& dag, Rng& rng, double epsilon_uniform) {
  Trajectory t;
  t.states.push_back(dag.source());
  double log_prob = 0.0;
  while (t.states.back() != dag.sink()) {
    const StateId s = t.states.back();
    const auto probs = forward_policy(params, s);
    std::size_t k = probs.size() - 1;
    if (epsilon_uniform > 0.0 && rng.uniform() < epsilon_uniform) {
      k = rng.below(probs.size());
    } else {
      double u = rng.uniform();
      for (std::size_t i = 0; i < probs.size(); ++i) {
        if (u < probs[i]) {
          k = i;
          break;
        }
        u -= probs[i];
      }
    }
    log_prob += std::log(probs[k]);
    t.states.push_back(dag.children(s)[k]);
  }
  if (epsilon_uniform == 0.0 && !std::isfinite(log_prob)) {
    throw std::logic_error("sampled an on-policy trajectory with zero probability");
  }
  return t;
}

double exact_jsd(const PolicyParams& params, const PointedDag& dag, const TerminalDistribution& target) {
  return jsd(exact_terminal_distribution(dag, tabulate_forward(params)), target);
}

namespace {

// The step's loss on the tape, or nothing when every trajectory was masked.
std::optional<ad::Var> batch_loss(const TrainConfig& config, const PointedDag& dag, TapedPolicy& model,
                                  RewardAccess& reward, const std::vector<Trajectory>& batch,
                                  std::vector<const Trajectory*>& used) {
  std::vector<ad::Var> terms;
  for (const auto& t : batch) {
    if (config.loss == Parametrization::kTB) {
      if (tb_mask_rejects(config.mask, t)) continue;
      terms.push_back(tb_loss(dag, t, model, reward));
    } else {
      auto value = trajectory_db_loss(dag, t, model, reward, config.mask);
      if (!value.total) continue;
      terms.push_back(*value.total);
    }
    used.push_back(&t);
  }
  if (terms.empty()) return std::nullopt;
  ad::Var total = terms.front().tape()->sum(terms);
  return total * (1.0 / static_cast<double>(terms.size()));
}

}  // namespace

TrainingTrace train_seed(const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  const PointedDag dag = build_grid(config.grid);
  const RewardTable rewards = RewardTable::for_grid(config.grid);
  const TerminalDistribution target = normalized_reward(dag, rewards);
  TrainConfig cfg = config;
  if (cfg.mask.hidden.empty()) cfg.mask = HidingMask::none(dag.num_states());

  TrainingTrace trace{seed, {}, 0, 0, std::nullopt, std::nullopt, PolicyParams(cfg.policy_config(), seed), {}, {}};
  PolicyParams& params = trace.final_params;
  Optimizer optimizer(cfg.optimizer, params);
  RewardAccess reward(rewards);
  Rng rng(seed, 0x73616d70);

  const auto start = std::chrono::steady_clock::now();
  double loss_sum = 0.0;
  auto record = [&](int iteration) {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double mean = trace.updates ? loss_sum / static_cast<double>(trace.updates)
                                      : std::numeric_limits<double>::quiet_NaN();
    trace.records.push_back({iteration, mean, exact_jsd(params, dag, target), elapsed});
  };

  record(0);
  for (int it = 1; it <= cfg.iterations; ++it) {
    std::vector<Trajectory> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (int b = 0; b < cfg.batch_size; ++b) batch.push_back(sample_trajectory(params, dag, rng, cfg.epsilon_uniform));

    ad::Tape tape(params.values());
    TapedPolicy model(params, tape);
    std::vector<const Trajectory*> used;
    const auto loss = batch_loss(cfg, dag, model, reward, batch, used);
    if (!loss) {
      ++trace.skipped;
    } else {
      const double value = loss->value();
      if (!std::isfinite(value)) {
        trace.abort_reason = "non-finite loss";
        trace.abort_iteration = it;
        break;
      }
      tape.backward(*loss);
      try {
        optimizer.step(params.values(), tape.gradient());
      } catch (const NonFiniteError& e) {
        trace.abort_reason = e.what();
        trace.abort_iteration = it;
        break;
      }
      loss_sum += value;
      ++trace.updates;
      if (cfg.store_trajectories) {
        for (const auto* t : used) trace.trained_trajectories.push_back(*t);
      }
    }
    if (it % cfg.eval_every == 0 || it == cfg.iterations) record(it);
  }
  trace.reward_reads = reward.reads();
  return trace;
}

std::vector<TrainingTrace> train(const TrainConfig& config) {
  config.validate();
  std::vector<std::optional<TrainingTrace>> slots(config.seeds.size());
  parallel_for(config.seeds.size(), static_cast<std::size_t>(config.jobs),
               [&](std::size_t i) { slots[i] = train_seed(config, config.seeds[i]); });
  std::vector<TrainingTrace> traces;
  traces.reserve(slots.size());
  for (auto& s : slots) traces.push_back(std::move(*s));
  return traces;
}

double posthoc_training_loss(const TrainConfig& config, const TrainingTrace& trace) {
  if (!config.store_trajectories) throw std::logic_error("run was trained without store_trajectories");
  if (trace.trained_trajectories.empty()) return std::numeric_limits<double>::quiet_NaN();
  const PointedDag dag = build_grid(config.grid);
  const RewardTable rewards = RewardTable::for_grid(config.grid);
  const HidingMask mask = config.mask.hidden.empty() ? HidingMask::none(dag.num_states()) : config.mask;
  EvaluatedPolicy model(trace.final_params);
  auto reward = [&](StateId s) { return rewards.at(s); };
  double total = 0.0;
  for (const auto& t : trace.trained_trajectories) {
    total += config.loss == Parametrization::kTB ? tb_loss(dag, t, model, reward)
                                                 : trajectory_db_loss(dag, t, model, reward, mask).value();
  }
  return total / static_cast<double>(trace.trained_trajectories.size());
}

}  // namespace gflowlab
