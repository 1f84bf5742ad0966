// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference computations that share no code with the library beyond reading
// raw parameter values. They work on grid coordinates directly.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "gflowlab/policy.hpp"

namespace oracle {

struct Coord {
  int a = 0;
  int b = 0;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

// Number of monotone paths from (0,0) to every cell, by the obvious recurrence.
inline std::vector<std::vector<std::uint64_t>> path_counts(int n) {
  std::vector<std::vector<std::uint64_t>> c(n, std::vector<std::uint64_t>(n, 0));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == 0 && b == 0) c[a][b] = 1;
      else c[a][b] = (a > 0 ? c[a - 1][b] : 0) + (b > 0 ? c[a][b - 1] : 0);
    }
  }
  return c;
}

inline std::uint64_t total_trajectories(int n) {
  std::uint64_t total = 0;
  for (const auto& row : path_counts(n)) total = std::accumulate(row.begin(), row.end(), total);
  return total;
}

// Every source-to-terminal path as a coordinate list, by recursion.
inline void grid_paths(int n, std::vector<Coord>& prefix, std::vector<std::vector<Coord>>& out) {
  out.push_back(prefix);
  const Coord last = prefix.back();
  if (last.a + 1 < n) {
    prefix.push_back({last.a + 1, last.b});
    grid_paths(n, prefix, out);
    prefix.pop_back();
  }
  if (last.b + 1 < n) {
    prefix.push_back({last.a, last.b + 1});
    grid_paths(n, prefix, out);
    prefix.pop_back();
  }
}

inline std::vector<std::vector<Coord>> grid_paths(int n) {
  std::vector<std::vector<Coord>> out;
  std::vector<Coord> prefix{{0, 0}};
  grid_paths(n, prefix, out);
  return out;
}

inline int num_parents(Coord c) { return (c.a > 0 ? 1 : 0) + (c.b > 0 ? 1 : 0); }

// Probabilities of (right, up, stop) at a cell; invalid moves get 0.
using ActionProbs = std::array<double, 3>;
using GridPolicy = std::function<ActionProbs(Coord)>;

// Terminal distribution by summing path probabilities over all paths.
inline std::map<Coord, double> terminal_by_enumeration(int n, const GridPolicy& policy) {
  std::map<Coord, double> out;
  for (const auto& path : grid_paths(n)) {
    double p = 1.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const auto probs = policy(path[i]);
      p *= path[i + 1].a > path[i].a ? probs[0] : probs[1];
    }
    p *= policy(path.back())[2];
    out[path.back()] += p;
  }
  return out;
}

// Naive re-implementation of the network: one-hot or scalar features, two
// tanh layers, masked log-softmax over (right, up, stop).
struct Mlp {
  const gflowlab::PolicyParams& params;

  std::vector<double> features(Coord c) const {
    const auto& cfg = params.config();
    const int n = cfg.grid_side;
    if (cfg.encoding == gflowlab::Encoding::kScalar) {
      return {2.0 * c.a / (n - 1) - 1.0, 2.0 * c.b / (n - 1) - 1.0};
    }
    std::vector<double> x(2 * n, 0.0);
    x[c.a] = 1.0;
    x[n + c.b] = 1.0;
    return x;
  }

  std::vector<double> layer(const char* w_name, const char* b_name, const std::vector<double>& x) const {
    const auto w = params.slice_values(w_name);
    const auto b = params.slice_values(b_name);
    std::vector<double> y(b.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      double acc = b[i];
      for (std::size_t j = 0; j < x.size(); ++j) acc += w[i * x.size() + j] * x[j];
      y[i] = acc;
    }
    return y;
  }

  std::vector<double> hidden(Coord c) const {
    auto h = layer("trunk.0.weight", "trunk.0.bias", features(c));
    for (auto& v : h) v = std::tanh(v);
    h = layer("trunk.1.weight", "trunk.1.bias", h);
    for (auto& v : h) v = std::tanh(v);
    return h;
  }

  // log P_F of (right, up, stop); -inf for moves off the grid.
  std::array<double, 3> log_forward(Coord c) const {
    const int n = params.config().grid_side;
    const auto logits = layer("forward.weight", "forward.bias", hidden(c));
    const bool valid[3] = {c.a + 1 < n, c.b + 1 < n, true};
    double norm = 0.0;
    for (int k = 0; k < 3; ++k) {
      if (valid[k]) norm += std::exp(logits[k]);
    }
    std::array<double, 3> out{};
    for (int k = 0; k < 3; ++k) out[k] = valid[k] ? logits[k] - std::log(norm) : -INFINITY;
    return out;
  }

  double flow(Coord c) const { return layer("flow.weight", "flow.bias", hidden(c))[0]; }
};

// TB log-ratio for a grid path with uniform P_B, written out term by term.
inline double tb_log_ratio(const gflowlab::PolicyParams& params, const std::vector<Coord>& path,
                           const std::function<double(Coord)>& reward) {
  const Mlp mlp{params};
  double total = params.log_z();
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const auto lf = mlp.log_forward(path[i]);
    total += path[i + 1].a > path[i].a ? lf[0] : lf[1];
    total += std::log(static_cast<double>(num_parents(path[i + 1])));
  }
  total += mlp.log_forward(path.back())[2];
  return total - std::log(reward(path.back()));
}

// Exact state flows with uniform P_B: F(s) = R(s) + sum_c F(c) / |Par(c)|.
inline std::vector<std::vector<double>> exact_flows(int n, const std::function<double(Coord)>& reward) {
  std::vector<std::vector<double>> f(n, std::vector<double>(n, 0.0));
  for (int a = n - 1; a >= 0; --a) {
    for (int b = n - 1; b >= 0; --b) {
      double v = reward({a, b});
      if (a + 1 < n) v += f[a + 1][b] / num_parents({a + 1, b});
      if (b + 1 < n) v += f[a][b + 1] / num_parents({a, b + 1});
      f[a][b] = v;
    }
  }
  return f;
}

// Central finite-difference gradient of f at x.
inline std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                             std::vector<double> x, double h = 1e-4) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// |a - b| relative to the larger magnitude, with an absolute floor of 1 so
// that entries that are zero up to rounding do not divide by ~0.
inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace oracle
