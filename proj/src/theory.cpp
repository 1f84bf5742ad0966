// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "gflowlab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "gflowlab/exact_eval.hpp"
#include "gflowlab/objectives.hpp"
#include "gflowlab/policy.hpp"
#include "gflowlab/random.hpp"

namespace gflowlab {

namespace {

std::string describe(const Trajectory& t) {
  std::string out;
  for (StateId s : t.states) out += (out.empty() ? "" : ">") + std::to_string(s);
  return out;
}

}  // namespace

double uniform_backward_weight(const PointedDag& dag, const Trajectory& t) {
  double w = 1.0;
  for (std::size_t i = 1; i + 1 < t.states.size(); ++i) w /= static_cast<double>(dag.parents(t.states[i]).size());
  return w;
}

ExactMinimizer exact_minimizer(const PointedDag& dag, const RewardTable& reward, std::size_t cap) {
  ExactMinimizer m;
  m.trajectories = enumerate_trajectories(dag, cap);
  m.z = reward.partition();
  m.probabilities.reserve(m.trajectories.size());
  for (const auto& t : m.trajectories) {
    m.probabilities.push_back(reward.at(t.terminal()) * uniform_backward_weight(dag, t) / m.z);
  }

  // P_F(s' | s) = flow(s -> s') / flow(s), flows summed over trajectories.
  std::vector<double> state_flow(dag.num_states(), 0.0);
  m.forward.assign(dag.num_states(), {});
  for (StateId s = 0; s < dag.num_states(); ++s) {
    if (s != dag.sink()) m.forward[s].assign(dag.children(s).size(), 0.0);
  }
  for (std::size_t j = 0; j < m.trajectories.size(); ++j) {
    const auto& st = m.trajectories[j].states;
    for (std::size_t i = 0; i + 1 < st.size(); ++i) {
      state_flow[st[i]] += m.probabilities[j];
      m.forward[st[i]][dag.child_index(st[i], st[i + 1])] += m.probabilities[j];
    }
  }
  for (StateId s = 0; s < dag.num_states(); ++s) {
    for (double& p : m.forward[s]) p /= state_flow[s];
  }
  return m;
}

TabularPolicy minimizer_policy(const PointedDag& dag, const ExactMinimizer& m) {
  TabularPolicy policy;
  policy.dag = &dag;
  policy.forward = m.forward;
  policy.log_z = std::log(m.z);
  return policy;
}

StabilityResult stability_check(const PointedDag& dag, const RewardTable& reward, double epsilon, int perturbations,
                                std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  StabilityResult result;
  const ExactMinimizer base = exact_minimizer(dag, reward);
  result.z = base.z;
  for (const auto& t : base.trajectories) result.c = std::max(result.c, uniform_backward_weight(dag, t));

  const auto& terminals = dag.terminal_states();
  Rng rng(seed, 0x73746162);
  for (int k = 0; k < perturbations; ++k) {
    std::vector<double> values = reward.values();
    if (terminals.size() >= 2) {
      for (;;) {
        const StateId x = terminals[rng.below(terminals.size())];
        StateId y = x;
        while (y == x) y = terminals[rng.below(terminals.size())];
        const double delta = epsilon * rng.uniform();
        if (values[y] - delta <= 0.0) continue;
        values[x] += delta;
        values[y] -= delta;
        break;
      }
    }
    const RewardTable perturbed(dag, values);
    const ExactMinimizer other = exact_minimizer(dag, perturbed);

    double shift = 0.0;
    for (StateId x : terminals) shift = std::max(shift, std::abs(reward.at(x) - perturbed.at(x)));
    double worst = 0.0;
    double l1 = 0.0;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < base.trajectories.size(); ++j) {
      const double d = std::abs(base.probabilities[j] - other.probabilities[j]);
      l1 += d;
      if (d > worst) {
        worst = d;
        arg = j;
      }
    }
    BoundReport r{"stability", worst, result.c / result.z * shift,
                  fmt::format("perturbation {} tau={}", k, describe(base.trajectories[arg])), kStabilityTolerance};
    if (r.rhs > 0.0) result.max_tightness = std::max(result.max_tightness, r.lhs / r.rhs);
    result.max_tv = std::max(result.max_tv, 0.5 * l1);
    result.max_l1 = std::max(result.max_l1, l1);
    result.max_reward_shift = std::max(result.max_reward_shift, shift);
    result.reports.push_back(std::move(r));
  }
  return result;
}

BoundReport tv_lemma_check(std::span<const double> h, std::span<const double> p, std::span<const double> q,
                           double tv_scale) {
  if (h.size() != p.size() || p.size() != q.size()) throw std::invalid_argument("tv lemma: size mismatch");
  double lo = 0.0;
  double hi = 0.0;
  double ep = 0.0;
  double eq = 0.0;
  std::size_t arg = 0;
  double arg_weight = -1.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!std::isfinite(h[i])) throw std::invalid_argument("tv lemma: h must be bounded");
    lo = std::min(lo, h[i]);
    hi = std::max(hi, h[i]);
    ep += p[i] * h[i];
    eq += q[i] * h[i];
    const double weight = std::abs(h[i] * (p[i] - q[i]));
    if (weight > arg_weight) {
      arg_weight = weight;
      arg = i;
    }
  }
  const std::vector<double> pv(p.begin(), p.end());
  const std::vector<double> qv(q.begin(), q.end());
  return BoundReport{"tv-lemma", std::abs(eq - ep), (hi - lo) * tv(pv, qv) * tv_scale,
                     fmt::format("largest contribution at index {}", arg), kBoundTolerance};
}

std::vector<BoundReport> beyond_iid_check(const PointedDag& dag, const RewardTable& reward, const PolicyTable& forward,
                                          std::optional<double> log_z) {
  const ExactMinimizer star = exact_minimizer(dag, reward);
  TabularPolicy model;
  model.dag = &dag;
  model.forward = forward;
  model.log_z = log_z.value_or(std::log(star.z));
  auto reward_fn = [&](StateId s) { return reward.at(s); };

  const std::size_t n = star.trajectories.size();
  std::vector<double> q(n);
  std::vector<double> loss(n);
  double loss_max = 0.0;
  std::size_t arg_max = 0;
  for (std::size_t j = 0; j < n; ++j) {
    q[j] = trajectory_probability(dag, forward, star.trajectories[j]);
    loss[j] = tb_loss(dag, star.trajectories[j], model, reward_fn);
    if (loss[j] > loss_max) {
      loss_max = loss[j];
      arg_max = j;
    }
  }
  double e_q = 0.0;
  double e_star = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    e_q += q[j] * loss[j];
    e_star += star.probabilities[j] * loss[j];
  }
  // Rounding can leave a tiny negative KL when q equals the minimizer.
  const double divergence = std::max(0.0, kl(q, star.probabilities));
  const double distance = tv(q, star.probabilities);
  const std::string witness = fmt::format("max-loss tau={}", describe(star.trajectories[arg_max]));

  return {
      {"jensen", divergence, std::sqrt(e_q), witness, kBoundTolerance},
      {"pinsker", distance, std::sqrt(0.5 * divergence), witness, kBoundTolerance},
      {"lemma", e_star, loss_max * distance + e_q, witness, kBoundTolerance},
      {"beyond-iid", e_star, loss_max * std::pow(e_q, 0.25) / std::sqrt(2.0) + e_q, witness, kBoundTolerance},
  };
}

void SuiteResult::add(BoundReport r) {
  ++trials;
  if (!r.passed()) ++failures;
  if (!worst || r.slack() < worst->slack()) worst = r;
  reports.push_back(std::move(r));
}

namespace {

std::vector<double> random_distribution(Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  double total = 0.0;
  for (double& v : p) {
    // Occasional exact zeros exercise the 0 log 0 convention.
    v = rng.uniform() < 0.15 ? 0.0 : -std::log(1.0 - rng.uniform());
    total += v;
  }
  if (total == 0.0) {
    p[rng.below(n)] = 1.0;
    return p;
  }
  for (double& v : p) v /= total;
  return p;
}

// Mixture of the minimizer's policy and a random softmax policy.
PolicyTable random_forward(const PointedDag& dag, const PolicyTable& minimizer, Rng& rng) {
  const double mix = rng.uniform();
  const double temperature = rng.uniform(0.0, 3.0);
  PolicyTable table = minimizer;
  for (StateId s = 0; s < dag.num_states(); ++s) {
    auto& row = table[s];
    if (row.empty()) continue;
    std::vector<double> soft(row.size());
    double total = 0.0;
    for (double& v : soft) {
      v = std::exp(temperature * rng.uniform(-1.0, 1.0));
      total += v;
    }
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = mix * row[k] + (1.0 - mix) * soft[k] / total;
  }
  return table;
}

SuiteResult lemma_suite(const CertificationConfig& config) {
  SuiteResult suite{"tv-lemma"};
  Rng rng(config.seed, 0x6c656d6d);
  const auto n = static_cast<std::size_t>(config.lemma_support);
  for (int k = 0; k < config.lemma_trials; ++k) {
    const auto p = random_distribution(rng, n);
    const auto q = k % 10 == 0 ? p : random_distribution(rng, n);
    const double m1 = rng.uniform(0.0, 5.0);
    const double m2 = rng.uniform(0.0, 5.0);
    std::vector<double> h(n);
    for (double& v : h) v = rng.uniform(-m1, m2);
    if (k % 10 == 5) std::fill(h.begin(), h.end(), h.front());
    auto r = tv_lemma_check(h, p, q, config.inject_bug ? 0.25 : 1.0);
    r.witness = fmt::format("instance {}: {}", k, r.witness);
    suite.add(std::move(r));
  }
  return suite;
}

std::vector<SuiteResult> iid_suites(const CertificationConfig& config, const PointedDag& dag,
                                    const RewardTable& fixed_reward, bool randomize_reward,
                                    std::optional<int> grid_side) {
  std::vector<SuiteResult> suites;
  for (const char* name : {"jensen", "pinsker", "lemma", "beyond-iid"}) suites.emplace_back(name);
  Rng rng(config.seed, 0x69696421);
  for (int k = 0; k < config.iid_trials; ++k) {
    std::vector<double> values = fixed_reward.values();
    if (randomize_reward) {
      for (StateId x : dag.terminal_states()) values[x] = std::exp(rng.uniform(std::log(1e-3), std::log(10.0)));
    }
    const RewardTable reward(dag, values);
    PolicyTable forward;
    if (grid_side && k % 4 == 3) {
      // A randomly initialized network, scaled up so the policy is far from uniform.
      PolicyParams params(PolicyConfig{*grid_side, 8}, config.seed * 7919 + static_cast<std::uint64_t>(k));
      const double gain = rng.uniform(0.5, 4.0);
      for (double& v : params.values()) v *= gain;
      forward = tabulate_forward(params);
    } else {
      forward = random_forward(dag, exact_minimizer(dag, reward).forward, rng);
    }
    auto reports = beyond_iid_check(dag, reward, forward);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      reports[i].witness = fmt::format("instance {}: {}", k, reports[i].witness);
      suites[i].add(std::move(reports[i]));
    }
  }
  return suites;
}

std::vector<SuiteResult> run_all(const CertificationConfig& config, const PointedDag& dag, const RewardTable& reward,
                                 bool randomize_reward, std::optional<int> grid_side) {
  std::vector<SuiteResult> out;
  SuiteResult stability{"stability"};
  auto checked = stability_check(dag, reward, config.epsilon, config.perturbations, config.seed);
  for (auto& r : checked.reports) stability.add(std::move(r));
  stability.notes.push_back(fmt::format("C = {:.6g}, Z = {:.6g}, C/Z = {:.6g}", checked.c, checked.z,
                                        checked.c / checked.z));
  stability.notes.push_back(fmt::format("max |dR| = {:.6g}, max beta-tightness (lhs/rhs) = {:.6g}",
                                        checked.max_reward_shift, checked.max_tightness));
  stability.notes.push_back(fmt::format("max distance between P1 and P2: TV (half L1) = {:.6g}, L1 = {:.6g}",
                                        checked.max_tv, checked.max_l1));
  out.push_back(std::move(stability));
  out.push_back(lemma_suite(config));
  for (auto& s : iid_suites(config, dag, reward, randomize_reward, grid_side)) out.push_back(std::move(s));
  return out;
}

}  // namespace

std::vector<SuiteResult> run_certification(const CertificationConfig& config) {
  GridSpec grid{config.grid_side, {}};
  if (grid.side >= 8) grid.modes = default_nine_modes(grid.side);
  const PointedDag dag = build_grid(grid);
  std::vector<double> values(dag.num_states(), 0.0);
  Rng rng(config.seed, 0x72657764);
  for (StateId x : dag.terminal_states()) {
    // Small grids cannot hold the nine-mode layout; use a random positive reward.
    values[x] = grid.side >= 8 ? reward(grid, x) : rng.uniform(0.1, 2.0);
  }
  return run_all(config, dag, RewardTable(dag, values), true, grid.side);
}

std::vector<SuiteResult> run_certification(const CertificationConfig& config, const PointedDag& dag,
                                           const RewardTable& reward) {
  return run_all(config, dag, reward, false, std::nullopt);
}

}  // namespace gflowlab
