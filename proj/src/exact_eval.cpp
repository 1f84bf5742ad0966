// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "gflowlab/exact_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace gflowlab {

double TerminalDistribution::at(StateId x) const {
  const auto it = std::lower_bound(states.begin(), states.end(), x);
  if (it == states.end() || *it != x) throw std::out_of_range(fmt::format("state {} is not terminal", x));
  return probs[static_cast<std::size_t>(it - states.begin())];
}

double TerminalDistribution::total() const {
  double t = 0.0;
  for (double p : probs) t += p;
  return t;
}

TerminalDistribution exact_terminal_distribution(const PointedDag& dag, const PolicyTable& forward) {
  if (forward.size() != dag.num_states()) throw std::invalid_argument("policy table does not match the DAG");
  std::vector<double> mu(dag.num_states(), 0.0);
  mu[dag.source()] = 1.0;
  TerminalDistribution out;
  out.states = dag.terminal_states();
  out.probs.assign(out.states.size(), 0.0);
  // Pushing mass along edges in topological order is the same recursion as
  // pulling it from parents.
  for (StateId s : dag.topological_order()) {
    if (s == dag.sink()) continue;
    const auto& kids = dag.children(s);
    const auto& p = forward[s];
    if (p.size() != kids.size()) throw std::invalid_argument(fmt::format("policy row {} has the wrong size", s));
    for (std::size_t k = 0; k < kids.size(); ++k) {
      if (kids[k] != dag.sink()) mu[kids[k]] += mu[s] * p[k];
    }
  }
  for (std::size_t i = 0; i < out.states.size(); ++i) {
    const StateId x = out.states[i];
    out.probs[i] = mu[x] * forward[x][dag.child_index(x, dag.sink())];
  }
  return out;
}

double trajectory_probability(const PointedDag& dag, const PolicyTable& forward, const Trajectory& t) {
  double p = 1.0;
  for (std::size_t i = 0; i + 1 < t.states.size(); ++i) {
    p *= forward[t.states[i]][dag.child_index(t.states[i], t.states[i + 1])];
  }
  return p;
}

TerminalDistribution normalized_reward(const PointedDag& dag, const RewardTable& reward) {
  TerminalDistribution out;
  out.states = dag.terminal_states();
  out.probs.reserve(out.states.size());
  for (StateId x : out.states) out.probs.push_back(reward.at(x) / reward.partition());
  return out;
}

namespace {

void check_lengths(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument(fmt::format("distributions have different supports ({} vs {})", p.size(), q.size()));
  }
}

void check_support(const TerminalDistribution& p, const TerminalDistribution& q) {
  if (p.states != q.states) throw std::invalid_argument("distributions are indexed by different state sets");
}

}  // namespace

double kl(const std::vector<double>& p, const std::vector<double>& q) {
  check_lengths(p, q);
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

double tv(const std::vector<double>& p, const std::vector<double>& q) {
  check_lengths(p, q);
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return 0.5 * d;
}

double jsd(const std::vector<double>& p, const std::vector<double>& q) {
  check_lengths(p, q);
  // Summed per coordinate so the result is exactly symmetric in (p, q).
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    double term = 0.0;
    if (p[i] > 0.0) term += p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) term += q[i] * std::log(q[i] / m);
    d += term;
  }
  return std::clamp(0.5 * d, 0.0, std::log(2.0));
}

double kl(const TerminalDistribution& p, const TerminalDistribution& q) {
  check_support(p, q);
  return kl(p.probs, q.probs);
}

double tv(const TerminalDistribution& p, const TerminalDistribution& q) {
  check_support(p, q);
  return tv(p.probs, q.probs);
}

double jsd(const TerminalDistribution& p, const TerminalDistribution& q) {
  check_support(p, q);
  return jsd(p.probs, q.probs);
}

void write_csv_matrix(std::ostream& out, const GridSpec& grid, const TerminalDistribution& dist) {
  for (int a = 0; a < grid.side; ++a) {
    for (int b = 0; b < grid.side; ++b) {
      out << (b ? "," : "") << fmt::format("{:.17g}", dist.at(grid_state(grid, a, b)));
    }
    out << '\n';
  }
}

void write_pgm(std::ostream& out, const GridSpec& grid, const TerminalDistribution& dist) {
  double peak = 0.0;
  for (int a = 0; a < grid.side; ++a) {
    for (int b = 0; b < grid.side; ++b) peak = std::max(peak, dist.at(grid_state(grid, a, b)));
  }
  out << "P2\n" << grid.side << ' ' << grid.side << "\n255\n";
  for (int a = 0; a < grid.side; ++a) {
    for (int b = 0; b < grid.side; ++b) {
      const double p = dist.at(grid_state(grid, a, b));
      const int grey = peak > 0.0 ? static_cast<int>(std::lround(255.0 * p / peak)) : 0;
      out << (b ? " " : "") << grey;
    }
    out << '\n';
  }
}

}  // namespace gflowlab
