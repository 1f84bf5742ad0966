// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact terminal distributions by flow dynamic programming, and divergences.
// All logarithms are natural; TV is half the L1 distance.

#pragma once

#include <iosfwd>
#include <vector>

#include "gflowlab/graph.hpp"
#include "gflowlab/hypergrid.hpp"
#include "gflowlab/tabular.hpp"

namespace gflowlab {

struct TerminalDistribution {
  std::vector<StateId> states;  // ascending terminal states
  std::vector<double> probs;    // aligned with states

  double at(StateId x) const;
  double total() const;
};

/// mu(source) = 1, mu(s) = sum over non-sink parents p of mu(p) P_F(s | p),
/// P^T(x) = mu(x) P_F(sink | x).
TerminalDistribution exact_terminal_distribution(const PointedDag& dag, const PolicyTable& forward);

/// prod P_F along the trajectory, including the terminate step.
double trajectory_probability(const PointedDag& dag, const PolicyTable& forward, const Trajectory& t);

TerminalDistribution normalized_reward(const PointedDag& dag, const RewardTable& reward);

/// Throws std::invalid_argument on mismatched supports or lengths.
double kl(const std::vector<double>& p, const std::vector<double>& q);  // +inf if P is not << Q
double tv(const std::vector<double>& p, const std::vector<double>& q);
double jsd(const std::vector<double>& p, const std::vector<double>& q);

double kl(const TerminalDistribution& p, const TerminalDistribution& q);
double tv(const TerminalDistribution& p, const TerminalDistribution& q);
double jsd(const TerminalDistribution& p, const TerminalDistribution& q);

/// N x N matrix, row a, column b, 17 significant digits.
void write_csv_matrix(std::ostream& out, const GridSpec& grid, const TerminalDistribution& dist);
/// Plain (P2) PGM, N rows (a) by N columns (b), grey = round(255 p / max p).
void write_pgm(std::ostream& out, const GridSpec& grid, const TerminalDistribution& dist);

}  // namespace gflowlab
