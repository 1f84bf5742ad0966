// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "gflowlab/hypergrid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "gflowlab/random.hpp"

namespace gflowlab {

void GridSpec::validate() const {
  if (side < 2) throw std::invalid_argument(fmt::format("grid side must be >= 2, got {}", side));
  for (const auto& m : modes) {
    if (m.a_lo > m.a_hi || m.b_lo > m.b_hi) throw std::invalid_argument("empty mode region");
    if (m.a_lo < 0 || m.b_lo < 0 || m.a_hi >= side || m.b_hi >= side) {
      throw std::invalid_argument(fmt::format("mode region [{},{}]x[{},{}] leaves the {}x{} grid", m.a_lo,
                                              m.a_hi, m.b_lo, m.b_hi, side, side));
    }
  }
}

StateId grid_state(const GridSpec& spec, int a, int b) {
  if (a < 0 || b < 0 || a >= spec.side || b >= spec.side) {
    throw std::out_of_range(fmt::format("({}, {}) is outside the {}x{} grid", a, b, spec.side, spec.side));
  }
  return static_cast<StateId>(a + spec.side * b);
}

GridCoord grid_coords(const GridSpec& spec, StateId s) {
  if (s >= spec.num_grid_states()) throw std::out_of_range(fmt::format("state {} is not a grid state", s));
  const int id = static_cast<int>(s);
  return {id % spec.side, id / spec.side};
}

PointedDag build_grid(const GridSpec& spec) {
  spec.validate();
  const int n = spec.side;
  std::vector<Edge> edges;
  edges.reserve(3 * spec.num_grid_states());
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      const StateId s = grid_state(spec, a, b);
      if (a + 1 < n) edges.emplace_back(s, grid_state(spec, a + 1, b));
      if (b + 1 < n) edges.emplace_back(s, grid_state(spec, a, b + 1));
      edges.emplace_back(s, spec.sink());
    }
  }
  return PointedDag(spec.num_grid_states() + 1, std::move(edges));
}

double reward(const GridSpec& spec, StateId x) {
  const auto [a, b] = grid_coords(spec, x);
  double r = kBaseReward;
  for (const auto& m : spec.modes) {
    if (m.contains(a, b)) r += 1.0;
  }
  return r;
}

std::vector<ModeRegion> default_nine_modes(int side) {
  if (side < 8) throw std::invalid_argument(fmt::format("nine-mode layout needs side >= 8, got {}", side));
  const int width = (side + 7) / 8;
  std::vector<ModeRegion> modes;
  modes.reserve(9);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int a_lo = (1 + 3 * i) * side / 8;
      const int b_lo = (1 + 3 * j) * side / 8;
      modes.push_back({a_lo, std::min(a_lo + width - 1, side - 1), b_lo, std::min(b_lo + width - 1, side - 1)});
    }
  }
  return modes;
}

RewardTable::RewardTable(const PointedDag& dag, std::vector<double> values)
    : values_(std::move(values)), defined_(dag.num_states(), false) {
  if (values_.size() != dag.num_states()) {
    throw std::invalid_argument(
        fmt::format("reward table has {} entries for {} states", values_.size(), dag.num_states()));
  }
  for (StateId x : dag.terminal_states()) {
    const double r = values_[x];
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument(fmt::format("reward of terminal state {} must be positive and finite", x));
    }
    defined_[x] = true;
    z_ += r;
  }
}

RewardTable RewardTable::for_grid(const GridSpec& spec) {
  std::vector<double> values(spec.num_grid_states() + 1, 0.0);
  for (StateId s = 0; s < spec.num_grid_states(); ++s) values[s] = reward(spec, s);
  return RewardTable(build_grid(spec), std::move(values));
}

double RewardTable::at(StateId s) const {
  if (!defined(s)) throw std::invalid_argument(fmt::format("state {} has no reward", s));
  return values_[s];
}

std::size_t HidingMask::count() const {
  return static_cast<std::size_t>(std::count(hidden.begin(), hidden.end(), true));
}

HidingMask HidingMask::none(std::size_t num_states) {
  return HidingMask{std::vector<bool>(num_states, false), HidingMode::kSkipTrajectory};
}

HidingMask sample_hidden_states(const GridSpec& spec, int count, std::uint64_t seed, bool exclude_modes,
                                HidingMode mode) {
  spec.validate();
  std::vector<StateId> pool;
  for (StateId s = 1; s < spec.num_grid_states(); ++s) {
    const auto [a, b] = grid_coords(spec, s);
    const bool in_mode =
        std::any_of(spec.modes.begin(), spec.modes.end(), [&](const ModeRegion& m) { return m.contains(a, b); });
    if (exclude_modes && in_mode) continue;
    pool.push_back(s);
  }
  if (count < 0 || static_cast<std::size_t>(count) > pool.size() ||
      static_cast<std::size_t>(count) + 1 >= spec.num_grid_states()) {
    throw std::invalid_argument(
        fmt::format("cannot hide {} states: {} candidates on a {}x{} grid", count, pool.size(), spec.side, spec.side));
  }
  Rng rng(seed, 0x68696465);
  // Partial Fisher-Yates: the first `count` slots are the sample.
  for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
    std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  }
  HidingMask mask = HidingMask::none(spec.num_grid_states() + 1);
  mask.mode = mode;
  for (int i = 0; i < count; ++i) mask.hidden[pool[static_cast<std::size_t>(i)]] = true;
  return mask;
}

HidingMask length_mask(const GridSpec& spec, int max_len) {
  spec.validate();
  if (max_len < 0 || max_len > 2 * (spec.side - 1)) {
    throw std::invalid_argument(fmt::format("length threshold {} outside [0, {}]", max_len, 2 * (spec.side - 1)));
  }
  HidingMask mask = HidingMask::none(spec.num_grid_states() + 1);
  mask.mode = HidingMode::kForbidTerminate;
  for (StateId s = 0; s < spec.num_grid_states(); ++s) {
    const auto [a, b] = grid_coords(spec, s);
    mask.hidden[s] = a + b > max_len;
  }
  return mask;
}

}  // namespace gflowlab
