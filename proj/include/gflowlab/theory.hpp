// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Numerical certificates for the stability and generalization bounds of
// trajectory-balance minimizers. Everything here is computed by exhaustive
// trajectory enumeration; nothing is sampled except the test instances.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gflowlab/graph.hpp"
#include "gflowlab/hypergrid.hpp"
#include "gflowlab/tabular.hpp"

namespace gflowlab {

/// The global TB minimizer with uniform backward policy:
/// P(tau) = R(x) prod_{i=1..n} 1/|Par(s_i)| / Z, the terminate step weighted 1.
struct ExactMinimizer {
  std::vector<Trajectory> trajectories;  // enumeration order
  std::vector<double> probabilities;     // aligned with trajectories
  PolicyTable forward;                   // P_F recovered from trajectory flows
  double z = 0.0;
};

/// prod_{i=1..n} 1/|Par(s_i)| over the non-source, non-sink states of t.
double uniform_backward_weight(const PointedDag& dag, const Trajectory& t);

ExactMinimizer exact_minimizer(const PointedDag& dag, const RewardTable& reward,
                               std::size_t cap = kDefaultTrajectoryCap);

/// The minimizer as a loss model: its P_F, uniform P_B and log Z = log sum R.
TabularPolicy minimizer_policy(const PointedDag& dag, const ExactMinimizer& m);

struct BoundReport {
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string witness;
  double tolerance = 1e-12;

  double slack() const { return rhs - lhs; }
  bool passed() const { return slack() >= -tolerance; }
};

inline constexpr double kStabilityTolerance = 1e-12;
inline constexpr double kBoundTolerance = 1e-9;

struct StabilityResult {
  std::vector<BoundReport> reports;  // one per perturbation: max_tau |dP| vs (C/Z) max_x |dR|
  double c = 0.0;                    // max_tau prod 1/|Par(s_i)|
  double z = 0.0;
  double max_tightness = 0.0;        // max over perturbations of lhs / rhs
  double max_tv = 0.0;               // max over perturbations of TV(P1, P2), half-L1
  double max_l1 = 0.0;               // the same distance without the 1/2
  double max_reward_shift = 0.0;     // max over perturbations of max_x |R1 - R2|
};

/// Sum-preserving perturbations R2 = R1 + delta (e_x - e_y), 0 <= delta < epsilon,
/// resampled until R2 > 0. Each report checks, over every trajectory,
/// |P1(tau) - P2(tau)| <= (C/Z) max_x |R1(x) - R2(x)|.
StabilityResult stability_check(const PointedDag& dag, const RewardTable& reward, double epsilon,
                                int perturbations, std::uint64_t seed);

/// |E_Q[h] - E_P[h]| <= (M1 + M2) TV(P, Q) with M1 = max(0, -min h) and
/// M2 = max(0, max h). `tv_scale` != 1 mis-scales the TV term (negative control).
BoundReport tv_lemma_check(std::span<const double> h, std::span<const double> p, std::span<const double> q,
                           double tv_scale = 1.0);

/// The four-step chain for a forward policy against the uniform-P_B minimizer,
/// with the TB loss evaluated at log Z = `log_z` (default: the true log Z):
///   jensen:  KL(P_F || P*) <= E_{P_F}[L]^(1/2)
///   pinsker: TV(P_F, P*) <= sqrt(KL / 2)
///   lemma:   E_{P*}[L] <= (M1 + M2) TV + E_{P_F}[L], M1 = 0, M2 = max_tau L
///   full:    E_{P*}[L] <= (M1 + M2) E_{P_F}[L]^(1/4) / sqrt(2) + E_{P_F}[L]
std::vector<BoundReport> beyond_iid_check(const PointedDag& dag, const RewardTable& reward,
                                          const PolicyTable& forward, std::optional<double> log_z = std::nullopt);

struct SuiteResult {
  explicit SuiteResult(std::string suite_name = {}) : name(std::move(suite_name)) {}

  std::string name;
  int trials = 0;
  int failures = 0;
  std::optional<BoundReport> worst;  // smallest slack
  std::vector<BoundReport> reports;
  std::vector<std::string> notes;    // extra constants worth printing

  bool passed() const { return failures == 0; }
  void add(BoundReport r);
};

struct CertificationConfig {
  int grid_side = 4;
  int perturbations = 100;
  double epsilon = 0.01;
  int lemma_trials = 1000;
  int iid_trials = 1000;
  int lemma_support = 5;
  std::uint64_t seed = 0;
  bool inject_bug = false;  // mis-scales TV in the lemma suite
};

/// Stability on the grid with the nine-mode (or base) reward, randomized TV
/// lemma instances and randomized beyond-i.i.d. instances on small grids.
std::vector<SuiteResult> run_certification(const CertificationConfig& config);

/// The same suites on a user DAG with explicit rewards.
std::vector<SuiteResult> run_certification(const CertificationConfig& config, const PointedDag& dag,
                                           const RewardTable& reward);

}  // namespace gflowlab
