// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// MLP policies on the hypergrid. A shared two-layer tanh trunk feeds separate
// heads for forward logits (right, up, terminate), optional backward logits,
// and a scalar log-flow residual. All learnable scalars, including log Z, live
// in one flat vector addressed through named slices.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gflowlab/autodiff.hpp"
#include "gflowlab/hypergrid.hpp"
#include "gflowlab/tabular.hpp"

namespace gflowlab {

enum class Encoding : std::uint8_t {
  kOneHot,  // two concatenated one-hot vectors of length N
  kScalar,  // (a, b) mapped linearly onto [-1, 1]^2
};

std::string_view to_string(Parametrization p);
std::string_view to_string(Encoding e);
Parametrization parse_parametrization(std::string_view text);
Encoding parse_encoding(std::string_view text);

struct PolicyConfig {
  int grid_side = 8;
  int hidden_width = 64;
  Encoding encoding = Encoding::kOneHot;
  Parametrization parametrization = Parametrization::kTB;
  bool learned_backward = false;

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

using StateEncoding = std::vector<double>;

std::size_t encoding_dimension(int side, Encoding encoding);
StateEncoding encode_state(const GridSpec& spec, StateId s, Encoding encoding = Encoding::kOneHot);

inline constexpr std::size_t kNumForwardActions = 3;   // right, up, terminate
inline constexpr std::size_t kNumBackwardActions = 2;  // from (a, b-1), from (a-1, b)

/// Forward action ids valid at grid state s, in ascending child order.
std::vector<std::size_t> forward_actions(int side, StateId s);
/// Backward action ids valid at grid state s, in ascending parent order.
std::vector<std::size_t> backward_actions(int side, StateId s);

struct NamedSlice {
  std::string name;
  ad::ParamSlice slice;

  bool operator==(const NamedSlice&) const = default;
};

class PolicyParams {
 public:
  /// Weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)); log Z = 0.
  PolicyParams(const PolicyConfig& config, std::uint64_t seed);
  /// Explicit values; throws if the size does not match the layout.
  PolicyParams(const PolicyConfig& config, std::vector<double> values);

  const PolicyConfig& config() const { return config_; }
  GridSpec grid() const { return GridSpec{config_.grid_side, {}}; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  const std::vector<NamedSlice>& slices() const { return slices_; }
  bool has_slice(std::string_view name) const;
  ad::ParamSlice slice(std::string_view name) const;
  std::span<double> slice_values(std::string_view name);
  std::span<const double> slice_values(std::string_view name) const;

  double log_z() const;
  void set_log_z(double value);
  bool all_finite() const;

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;

 private:
  void build_layout();

  PolicyConfig config_;
  std::vector<NamedSlice> slices_;
  std::vector<double> values_;
};

/// Network outputs at one grid state, evaluated without recording.
struct StateOutputs {
  std::vector<double> log_forward;   // aligned with dag children
  std::vector<double> log_backward;  // aligned with dag parents; empty at the source
  double flow_residual = 0.0;        // 0 under TB
};

StateOutputs evaluate_state(const PolicyParams& params, StateId s);

/// P_F(. | s) over children(s). s must be a grid state.
std::vector<double> forward_policy(const PolicyParams& params, StateId s);
/// P_B(. | s') over parents(s'); uniform when the policy has no backward head.
/// s' must be a grid state other than the source.
std::vector<double> backward_policy(const PolicyParams& params, StateId s_prime);

using RewardFn = std::function<double(StateId)>;

/// DB: the flow head output. FL-DB: log R(s) plus the flow head output.
/// Throws std::logic_error under TB.
double log_state_flow(const PolicyParams& params, StateId s, const RewardFn& reward);

/// Forward policy for every non-sink state of the grid DAG.
PolicyTable tabulate_forward(const PolicyParams& params);
PolicyTable tabulate_backward(const PolicyParams& params);

/// Records network evaluations on a tape; each state is evaluated at most once.
class TapedPolicy {
 public:
  using Scalar = ad::Var;

  TapedPolicy(const PolicyParams& params, ad::Tape& tape);

  ad::Var log_forward(StateId s, std::size_t child);
  ad::Var log_backward(StateId s, std::size_t parent);
  ad::Var log_partition();
  ad::Var flow_residual(StateId s);
  Parametrization parametrization() const { return params_.config().parametrization; }

 private:
  struct Cached {
    ad::Var log_forward;
    std::optional<ad::Var> log_backward;
    std::optional<ad::Var> flow;
  };
  Cached& outputs(StateId s);

  const PolicyParams& params_;
  ad::Tape& tape_;
  GridSpec grid_;
  std::vector<std::optional<Cached>> cache_;
  std::optional<ad::Var> log_z_;
};

/// Same interface as TapedPolicy, evaluated in plain doubles.
class EvaluatedPolicy {
 public:
  using Scalar = double;

  explicit EvaluatedPolicy(const PolicyParams& params);

  double log_forward(StateId s, std::size_t child) { return outputs(s).log_forward.at(child); }
  double log_backward(StateId s, std::size_t parent);
  double log_partition() const { return params_.log_z(); }
  double flow_residual(StateId s) { return outputs(s).flow_residual; }
  Parametrization parametrization() const { return params_.config().parametrization; }

 private:
  const StateOutputs& outputs(StateId s);

  const PolicyParams& params_;
  std::vector<std::optional<StateOutputs>> cache_;
};

struct Checkpoint {
  GridSpec grid;
  PolicyParams params;
};

/// Text format: a header of `key value` lines, then one `slice NAME ROWS COLS`
/// line per slice followed by a line of its values (17 significant digits),
/// then `end`. Round-trips bit-exactly.
void save_checkpoint(std::ostream& out, const GridSpec& grid, const PolicyParams& params);
Checkpoint load_checkpoint(std::istream& in);

std::string format_modes(const std::vector<ModeRegion>& modes);
std::vector<ModeRegion> parse_modes(std::string_view text);

}  // namespace gflowlab
