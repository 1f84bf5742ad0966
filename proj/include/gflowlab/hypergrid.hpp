// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// The 2-D hypergrid environment: N x N grid states (a, b) with 0 <= a, b < N,
// actions "increment a", "increment b" and "terminate". Every grid state is
// terminal. State (a, b) has index a + N * b and the sink has index N * N, so
// ascending child order is always (right, up, terminate).

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gflowlab/graph.hpp"

namespace gflowlab {

/// Axis-aligned inclusive rectangle [a_lo, a_hi] x [b_lo, b_hi].
struct ModeRegion {
  int a_lo = 0;
  int a_hi = 0;
  int b_lo = 0;
  int b_hi = 0;

  bool contains(int a, int b) const { return a >= a_lo && a <= a_hi && b >= b_lo && b <= b_hi; }
  friend bool operator==(const ModeRegion&, const ModeRegion&) = default;
};

struct GridSpec {
  int side = 8;
  std::vector<ModeRegion> modes;

  /// Throws std::invalid_argument on side < 2 or an out-of-grid/empty region.
  void validate() const;
  std::size_t num_grid_states() const { return static_cast<std::size_t>(side) * side; }
  StateId sink() const { return static_cast<StateId>(num_grid_states()); }
};

struct GridCoord {
  int a = 0;
  int b = 0;
  friend bool operator==(const GridCoord&, const GridCoord&) = default;
};

StateId grid_state(const GridSpec& spec, int a, int b);
/// Throws for the sink or an out-of-range id.
GridCoord grid_coords(const GridSpec& spec, StateId s);

PointedDag build_grid(const GridSpec& spec);

inline constexpr double kBaseReward = 1e-3;

/// 1e-3 plus the number of mode regions containing x.
double reward(const GridSpec& spec, StateId x);

/// Nine disjoint squares of side ceil(N/8) on a 3x3 lattice, lower corners at
/// floor((1 + 3i) N / 8). Requires N >= 8.
std::vector<ModeRegion> default_nine_modes(int side);

/// Positive rewards over the terminal states of a DAG, indexed by state id.
class RewardTable {
 public:
  /// `values` is indexed by state id; entries for non-terminal states are ignored.
  RewardTable(const PointedDag& dag, std::vector<double> values);
  static RewardTable for_grid(const GridSpec& spec);

  /// Throws std::invalid_argument when s carries no reward.
  double at(StateId s) const;
  bool defined(StateId s) const { return s < defined_.size() && defined_[s]; }
  double partition() const { return z_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
  std::vector<bool> defined_;
  double z_ = 0.0;
};

enum class HidingMode : std::uint8_t {
  kSkipTrajectory,   // reject any trajectory visiting a hidden state
  kForbidTerminate,  // reject trajectories terminating at a hidden state
};

struct HidingMask {
  std::vector<bool> hidden;  // indexed by state id; size num_states of the DAG
  HidingMode mode = HidingMode::kSkipTrajectory;

  bool is_hidden(StateId s) const { return s < hidden.size() && hidden[s]; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  static HidingMask none(std::size_t num_states);
};

/// Uniform sample without replacement of grid states other than (0, 0).
/// With `exclude_modes`, cells inside a mode region are never hidden.
HidingMask sample_hidden_states(const GridSpec& spec, int count, std::uint64_t seed,
                                bool exclude_modes = false,
                                HidingMode mode = HidingMode::kSkipTrajectory);

/// Hides every (a, b) with a + b > max_len; termination semantics.
HidingMask length_mask(const GridSpec& spec, int max_len);

}  // namespace gflowlab
