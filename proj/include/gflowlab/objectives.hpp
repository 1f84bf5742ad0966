// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Trajectory balance, detailed balance and forward-looking detailed balance.
//
// The losses are templates over a policy model exposing
//   Scalar log_forward(StateId s, size_t child)    log P_F(children(s)[child] | s)
//   Scalar log_backward(StateId s, size_t parent)  log P_B(parents(s)[parent] | s)
//   Scalar log_partition()                         log Z_theta
//   Scalar flow_residual(StateId s)                flow head output
//   Parametrization parametrization()
// with Scalar either double or ad::Var. Rewards are read through a callable
// `double(StateId)` so callers can instrument every access.
//
// The terminate step s_n -> s_f contributes log P_F(s_f | s_n) to the forward
// sum and nothing to the backward sum: P_B(s_n | s_f) is fixed to 1.

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "gflowlab/autodiff.hpp"
#include "gflowlab/graph.hpp"
#include "gflowlab/hypergrid.hpp"
#include "gflowlab/tabular.hpp"

namespace gflowlab {

using ad::square;
using ad::value_of;

template <class S>
struct LossValue {
  std::optional<S> total;     // empty when every term was masked out
  std::vector<double> terms;  // values of the included terms, in trajectory order
  std::size_t omitted = 0;

  double value() const {
    double v = 0.0;
    for (double t : terms) v += t;
    return v;
  }
};

namespace detail {

inline double checked_log_reward(double r, StateId x) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument(fmt::format("reward at state {} must be positive and finite, got {}", x, r));
  }
  return std::log(r);
}

template <class S>
S accumulate(std::optional<S>& total, S term) {
  total = total ? *total + term : term;
  return *total;
}

}  // namespace detail

/// log( Z prod P_F / (R(x) prod P_B) ) along a complete trajectory.
template <class Model, class Reward>
typename Model::Scalar tb_log_ratio(const PointedDag& dag, const Trajectory& t, Model& model, Reward&& reward) {
  using S = typename Model::Scalar;
  const auto& s = t.states;
  S forward = model.log_forward(s[0], dag.child_index(s[0], s[1]));
  for (std::size_t i = 1; i + 1 < s.size(); ++i) forward = forward + model.log_forward(s[i], dag.child_index(s[i], s[i + 1]));
  S ratio = model.log_partition() + forward;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) ratio = ratio - model.log_backward(s[i], dag.parent_index(s[i], s[i - 1]));
  const StateId x = t.terminal();
  return ratio - detail::checked_log_reward(reward(x), x);
}

template <class Model, class Reward>
typename Model::Scalar tb_loss(const PointedDag& dag, const Trajectory& t, Model& model, Reward&& reward) {
  return square(tb_log_ratio(dag, t, model, reward));
}

/// log F(s): the flow head under DB, log R(s) plus the flow head under FL-DB.
template <class Model, class Reward>
typename Model::Scalar log_state_flow(Model& model, StateId s, Reward&& reward) {
  switch (model.parametrization()) {
    case Parametrization::kTB:
      throw std::logic_error("TB parametrization has no state flow");
    case Parametrization::kDB:
      return model.flow_residual(s);
    case Parametrization::kFLDB:
      return model.flow_residual(s) + detail::checked_log_reward(reward(s), s);
  }
  throw std::logic_error("unknown parametrization");
}

/// Squared detailed-balance residual of one edge s -> s_next. At the terminate
/// edge the flow target is the reward.
template <class Model, class Reward>
typename Model::Scalar db_loss(const PointedDag& dag, StateId s, StateId s_next, Model& model, Reward&& reward) {
  auto lhs = log_state_flow(model, s, reward) + model.log_forward(s, dag.child_index(s, s_next));
  if (s_next == dag.sink()) return square(lhs - detail::checked_log_reward(reward(s), s));
  auto rhs = log_state_flow(model, s_next, reward) + model.log_backward(s_next, dag.parent_index(s_next, s));
  return square(lhs - rhs);
}

/// Whether a transition's loss term reads the reward of a hidden state.
/// DB reads R only at the terminate edge; FL-DB reads R at both endpoints.
inline bool db_term_reads_hidden(const PointedDag& dag, Parametrization p, StateId s, StateId s_next,
                                 const HidingMask& mask) {
  if (s_next == dag.sink()) return mask.is_hidden(s);
  return p == Parametrization::kFLDB && (mask.is_hidden(s) || mask.is_hidden(s_next));
}

/// Sum of db_loss over the transitions of t, omitting terms that would read a
/// hidden reward.
template <class Model, class Reward>
LossValue<typename Model::Scalar> trajectory_db_loss(const PointedDag& dag, const Trajectory& t, Model& model,
                                                     Reward&& reward, const HidingMask& mask) {
  LossValue<typename Model::Scalar> out;
  const auto p = model.parametrization();
  if (p == Parametrization::kTB) throw std::logic_error("TB parametrization has no state flow");
  for (std::size_t i = 0; i + 1 < t.states.size(); ++i) {
    const StateId s = t.states[i];
    const StateId s_next = t.states[i + 1];
    if (db_term_reads_hidden(dag, p, s, s_next, mask)) {
      ++out.omitted;
      continue;
    }
    auto term = db_loss(dag, s, s_next, model, reward);
    out.terms.push_back(value_of(term));
    detail::accumulate(out.total, term);
  }
  return out;
}

/// Whether TB training must skip t under the mask.
inline bool tb_mask_rejects(const HidingMask& mask, const Trajectory& t) {
  if (mask.mode == HidingMode::kForbidTerminate) return mask.is_hidden(t.terminal());
  for (std::size_t i = 0; i + 1 < t.states.size(); ++i) {
    if (mask.is_hidden(t.states[i])) return true;
  }
  return false;
}

}  // namespace gflowlab
