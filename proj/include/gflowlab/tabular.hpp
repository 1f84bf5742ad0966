// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "gflowlab/graph.hpp"

namespace gflowlab {

/// Per-state probabilities aligned with dag.children(s) (forward) or
/// dag.parents(s) (backward). Entries for states without such a list are empty.
using PolicyTable = std::vector<std::vector<double>>;

enum class Parametrization : std::uint8_t { kTB, kDB, kFLDB };

PolicyTable uniform_forward(const PointedDag& dag);
/// Uniform over parents for every state except the source and the sink.
PolicyTable uniform_backward(const PointedDag& dag);

/// A policy given by explicit tables. Serves as the double-valued loss model
/// for exact minimizers and hand-built test cases.
struct TabularPolicy {
  using Scalar = double;

  const PointedDag* dag = nullptr;
  PolicyTable forward;
  std::optional<PolicyTable> backward;       // uniform when empty
  double log_z = 0.0;
  std::vector<double> flow_residuals;        // per state; DB / FL-DB only
  Parametrization kind = Parametrization::kTB;

  double log_forward(StateId s, std::size_t child) const { return std::log(forward[s][child]); }
  double log_backward(StateId s, std::size_t parent) const {
    if (backward) return std::log((*backward)[s][parent]);
    return -std::log(static_cast<double>(dag->parents(s).size()));
  }
  double log_partition() const { return log_z; }
  double flow_residual(StateId s) const { return flow_residuals.at(s); }
  Parametrization parametrization() const { return kind; }
};

}  // namespace gflowlab
