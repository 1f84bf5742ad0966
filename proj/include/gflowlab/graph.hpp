// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pointed DAGs: explicit state graphs with a unique source and a unique sink.

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gflowlab {

using StateId = std::uint32_t;
using Edge = std::pair<StateId, StateId>;

/// Raised when an edge list contains a cycle. Carries one back-edge of it.
class CycleError : public std::invalid_argument {
 public:
  CycleError(Edge back_edge);
  Edge back_edge() const { return back_edge_; }

 private:
  Edge back_edge_;
};

/// Raised when trajectory enumeration would exceed its cap.
class EnumerationCapExceeded : public std::runtime_error {
 public:
  explicit EnumerationCapExceeded(std::size_t cap);
};

/// A complete path s0 -> ... -> x -> sink. `states` includes both endpoints.
struct Trajectory {
  std::vector<StateId> states;

  /// Number of transitions before the terminate step.
  std::size_t length() const { return states.size() < 2 ? 0 : states.size() - 2; }
  /// The terminal state x (the one right before the sink).
  StateId terminal() const { return states[states.size() - 2]; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Kahn's algorithm with ascending-index tie breaking. Throws CycleError.
std::vector<StateId> topological_sort(std::size_t num_states, const std::vector<Edge>& edges);

/// Immutable pointed DAG. States are dense indices [0, num_states).
/// Child and parent lists are kept in ascending index order, which fixes the
/// action numbering of every policy defined on the graph.
class PointedDag {
 public:
  /// Validates acyclicity, source/sink uniqueness and (co-)reachability.
  PointedDag(std::size_t num_states, std::vector<Edge> edges);

  std::size_t num_states() const { return children_.size(); }
  std::size_t num_edges() const { return num_edges_; }
  StateId source() const { return source_; }
  StateId sink() const { return sink_; }
  bool contains(StateId s) const { return s < num_states(); }

  const std::vector<StateId>& children(StateId s) const;
  const std::vector<StateId>& parents(StateId s) const;
  /// States with an edge to the sink, ascending.
  const std::vector<StateId>& terminal_states() const { return parents_[sink_]; }
  bool is_terminal(StateId s) const;
  bool has_edge(StateId from, StateId to) const;

  /// Position of `child` in children(parent); throws if the edge is absent.
  std::size_t child_index(StateId parent, StateId child) const;
  /// Position of `parent` in parents(child); throws if the edge is absent.
  std::size_t parent_index(StateId child, StateId parent) const;

  /// Source first, sink last; every edge points forward.
  const std::vector<StateId>& topological_order() const { return topo_; }

 private:
  void check_state(StateId s) const;

  std::vector<std::vector<StateId>> children_;
  std::vector<std::vector<StateId>> parents_;
  std::vector<StateId> topo_;
  std::size_t num_edges_ = 0;
  StateId source_ = 0;
  StateId sink_ = 0;
};

inline constexpr std::size_t kDefaultTrajectoryCap = 10'000'000;

/// Every source-to-sink path exactly once, in depth-first order with children
/// visited ascending.
std::vector<Trajectory> enumerate_trajectories(const PointedDag& dag,
                                               std::size_t cap = kDefaultTrajectoryCap);

/// Throws std::invalid_argument unless `t` is a valid complete trajectory of `dag`.
void validate_trajectory(const PointedDag& dag, const Trajectory& t);

}  // namespace gflowlab
