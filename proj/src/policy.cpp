// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "gflowlab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "gflowlab/random.hpp"

namespace gflowlab {

std::string_view to_string(Parametrization p) {
  switch (p) {
    case Parametrization::kTB: return "tb";
    case Parametrization::kDB: return "db";
    case Parametrization::kFLDB: return "fldb";
  }
  return "?";
}

std::string_view to_string(Encoding e) { return e == Encoding::kOneHot ? "onehot" : "scalar"; }

Parametrization parse_parametrization(std::string_view text) {
  if (text == "tb") return Parametrization::kTB;
  if (text == "db") return Parametrization::kDB;
  if (text == "fldb" || text == "fl-db") return Parametrization::kFLDB;
  throw std::invalid_argument(fmt::format("unknown loss '{}' (expected tb, db or fldb)", text));
}

Encoding parse_encoding(std::string_view text) {
  if (text == "onehot") return Encoding::kOneHot;
  if (text == "scalar") return Encoding::kScalar;
  throw std::invalid_argument(fmt::format("unknown encoding '{}' (expected onehot or scalar)", text));
}

std::size_t encoding_dimension(int side, Encoding encoding) {
  return encoding == Encoding::kOneHot ? static_cast<std::size_t>(2 * side) : 2;
}

StateEncoding encode_state(const GridSpec& spec, StateId s, Encoding encoding) {
  const auto [a, b] = grid_coords(spec, s);
  if (encoding == Encoding::kScalar) {
    const double scale = 2.0 / static_cast<double>(spec.side - 1);
    return {a * scale - 1.0, b * scale - 1.0};
  }
  StateEncoding x(2 * static_cast<std::size_t>(spec.side), 0.0);
  x[static_cast<std::size_t>(a)] = 1.0;
  x[static_cast<std::size_t>(spec.side + b)] = 1.0;
  return x;
}

std::vector<std::size_t> forward_actions(int side, StateId s) {
  const auto [a, b] = grid_coords(GridSpec{side, {}}, s);
  std::vector<std::size_t> actions;
  if (a + 1 < side) actions.push_back(0);
  if (b + 1 < side) actions.push_back(1);
  actions.push_back(2);
  return actions;
}

std::vector<std::size_t> backward_actions(int side, StateId s) {
  const auto [a, b] = grid_coords(GridSpec{side, {}}, s);
  std::vector<std::size_t> actions;
  if (b > 0) actions.push_back(0);
  if (a > 0) actions.push_back(1);
  return actions;
}

// ---------------------------------------------------------------------------
// Parameters

PolicyParams::PolicyParams(const PolicyConfig& config, std::uint64_t seed) : config_(config) {
  build_layout();
  Rng rng(seed, 0x696e6974);
  std::size_t fan_in = 1;
  for (const auto& [name, slice] : slices_) {
    if (name == "log_z") continue;
    // Each bias follows its weight matrix in the layout and shares its fan-in.
    if (name.ends_with(".weight")) fan_in = slice.cols;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < slice.size(); ++i) values_[slice.offset + i] = rng.uniform(-bound, bound);
  }
}

PolicyParams::PolicyParams(const PolicyConfig& config, std::vector<double> values) : config_(config) {
  build_layout();
  if (values.size() != values_.size()) {
    throw std::invalid_argument(
        fmt::format("parameter vector has {} values, layout needs {}", values.size(), values_.size()));
  }
  values_ = std::move(values);
}

void PolicyParams::build_layout() {
  if (config_.grid_side < 2) throw std::invalid_argument("policy grid side must be >= 2");
  if (config_.hidden_width < 1) throw std::invalid_argument("hidden width must be positive");
  const std::size_t in = encoding_dimension(config_.grid_side, config_.encoding);
  const auto width = static_cast<std::size_t>(config_.hidden_width);
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    slices_.push_back({std::move(name), ad::ParamSlice{offset, rows, cols}});
    offset += rows * cols;
  };
  add("trunk.0.weight", width, in);
  add("trunk.0.bias", width, 1);
  add("trunk.1.weight", width, width);
  add("trunk.1.bias", width, 1);
  add("forward.weight", kNumForwardActions, width);
  add("forward.bias", kNumForwardActions, 1);
  if (config_.learned_backward) {
    add("backward.weight", kNumBackwardActions, width);
    add("backward.bias", kNumBackwardActions, 1);
  }
  if (config_.parametrization != Parametrization::kTB) {
    add("flow.weight", 1, width);
    add("flow.bias", 1, 1);
  }
  add("log_z", 1, 1);
  values_.assign(offset, 0.0);
}

bool PolicyParams::has_slice(std::string_view name) const {
  return std::any_of(slices_.begin(), slices_.end(), [&](const NamedSlice& s) { return s.name == name; });
}

ad::ParamSlice PolicyParams::slice(std::string_view name) const {
  for (const auto& s : slices_) {
    if (s.name == name) return s.slice;
  }
  throw std::out_of_range(fmt::format("no parameter slice named '{}'", name));
}

std::span<double> PolicyParams::slice_values(std::string_view name) {
  const auto s = slice(name);
  return std::span<double>(values_).subspan(s.offset, s.size());
}

std::span<const double> PolicyParams::slice_values(std::string_view name) const {
  const auto s = slice(name);
  return std::span<const double>(values_).subspan(s.offset, s.size());
}

double PolicyParams::log_z() const { return values_[slice("log_z").offset]; }
void PolicyParams::set_log_z(double value) { values_[slice("log_z").offset] = value; }

bool PolicyParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// Plain evaluation

namespace {

std::vector<double> dense(std::span<const double> params, ad::ParamSlice w, ad::ParamSlice b,
                          const std::vector<double>& x) {
  std::vector<double> y(w.rows);
  for (std::size_t i = 0; i < w.rows; ++i) {
    double acc = params[b.offset + i];
    const double* row = params.data() + w.offset + i * w.cols;
    for (std::size_t j = 0; j < w.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> masked_log_softmax(const std::vector<double>& logits, const std::vector<std::size_t>& active) {
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t k : active) peak = std::max(peak, logits[k]);
  double total = 0.0;
  for (std::size_t k : active) total += std::exp(logits[k] - peak);
  const double log_norm = peak + std::log(total);
  std::vector<double> out;
  out.reserve(active.size());
  for (std::size_t k : active) out.push_back(logits[k] - log_norm);
  return out;
}

}  // namespace

StateOutputs evaluate_state(const PolicyParams& params, StateId s) {
  const auto& cfg = params.config();
  const GridSpec grid = params.grid();
  const auto theta = params.values();
  auto h = dense(theta, params.slice("trunk.0.weight"), params.slice("trunk.0.bias"),
                 encode_state(grid, s, cfg.encoding));
  for (double& v : h) v = std::tanh(v);
  h = dense(theta, params.slice("trunk.1.weight"), params.slice("trunk.1.bias"), h);
  for (double& v : h) v = std::tanh(v);

  StateOutputs out;
  out.log_forward = masked_log_softmax(dense(theta, params.slice("forward.weight"), params.slice("forward.bias"), h),
                                       forward_actions(cfg.grid_side, s));
  const auto back = backward_actions(cfg.grid_side, s);
  if (!back.empty()) {
    if (cfg.learned_backward) {
      out.log_backward = masked_log_softmax(
          dense(theta, params.slice("backward.weight"), params.slice("backward.bias"), h), back);
    } else {
      out.log_backward.assign(back.size(), -std::log(static_cast<double>(back.size())));
    }
  }
  if (cfg.parametrization != Parametrization::kTB) {
    out.flow_residual = dense(theta, params.slice("flow.weight"), params.slice("flow.bias"), h)[0];
  }
  return out;
}

std::vector<double> forward_policy(const PolicyParams& params, StateId s) {
  auto p = evaluate_state(params, s).log_forward;
  for (double& v : p) v = std::exp(v);
  return p;
}

std::vector<double> backward_policy(const PolicyParams& params, StateId s_prime) {
  if (s_prime == 0) throw std::invalid_argument("the source has no parents");
  auto p = evaluate_state(params, s_prime).log_backward;
  for (double& v : p) v = std::exp(v);
  return p;
}

double log_state_flow(const PolicyParams& params, StateId s, const RewardFn& reward) {
  switch (params.config().parametrization) {
    case Parametrization::kTB:
      throw std::logic_error("TB parametrization has no state-flow head");
    case Parametrization::kDB:
      return evaluate_state(params, s).flow_residual;
    case Parametrization::kFLDB:
      return std::log(reward(s)) + evaluate_state(params, s).flow_residual;
  }
  return 0.0;
}

PolicyTable tabulate_forward(const PolicyParams& params) {
  const std::size_t n = params.grid().num_grid_states();
  PolicyTable table(n + 1);
  for (StateId s = 0; s < n; ++s) table[s] = forward_policy(params, s);
  return table;
}

PolicyTable tabulate_backward(const PolicyParams& params) {
  const std::size_t n = params.grid().num_grid_states();
  PolicyTable table(n + 1);
  for (StateId s = 1; s < n; ++s) table[s] = backward_policy(params, s);
  return table;
}

// ---------------------------------------------------------------------------
// Recorded evaluation

TapedPolicy::TapedPolicy(const PolicyParams& params, ad::Tape& tape)
    : params_(params), tape_(tape), grid_(params.grid()), cache_(grid_.num_grid_states()) {}

TapedPolicy::Cached& TapedPolicy::outputs(StateId s) {
  if (s >= cache_.size()) throw std::out_of_range(fmt::format("state {} is not a grid state", s));
  if (cache_[s]) return *cache_[s];
  const auto& cfg = params_.config();
  ad::Var x = tape_.constant(encode_state(grid_, s, cfg.encoding));
  ad::Var h = tape_.tanh(tape_.linear(x, params_.slice("trunk.0.weight"), params_.slice("trunk.0.bias")));
  h = tape_.tanh(tape_.linear(h, params_.slice("trunk.1.weight"), params_.slice("trunk.1.bias")));

  Cached c;
  c.log_forward = tape_.log_softmax(tape_.linear(h, params_.slice("forward.weight"), params_.slice("forward.bias")),
                                    forward_actions(cfg.grid_side, s));
  if (cfg.learned_backward && s != 0) {
    c.log_backward = tape_.log_softmax(
        tape_.linear(h, params_.slice("backward.weight"), params_.slice("backward.bias")),
        backward_actions(cfg.grid_side, s));
  }
  if (cfg.parametrization != Parametrization::kTB) {
    c.flow = tape_.linear(h, params_.slice("flow.weight"), params_.slice("flow.bias"));
  }
  cache_[s] = std::move(c);
  return *cache_[s];
}

ad::Var TapedPolicy::log_forward(StateId s, std::size_t child) { return tape_.element(outputs(s).log_forward, child); }

ad::Var TapedPolicy::log_backward(StateId s, std::size_t parent) {
  if (!params_.config().learned_backward) {
    const auto n = backward_actions(params_.config().grid_side, s).size();
    if (parent >= n) throw std::out_of_range("parent index out of range");
    return tape_.constant(-std::log(static_cast<double>(n)));
  }
  auto& c = outputs(s);
  if (!c.log_backward) throw std::invalid_argument("the source has no parents");
  return tape_.element(*c.log_backward, parent);
}

ad::Var TapedPolicy::log_partition() {
  if (!log_z_) log_z_ = tape_.parameter(params_.slice("log_z"));
  return *log_z_;
}

ad::Var TapedPolicy::flow_residual(StateId s) {
  auto& c = outputs(s);
  if (!c.flow) throw std::logic_error("TB parametrization has no state-flow head");
  return *c.flow;
}

EvaluatedPolicy::EvaluatedPolicy(const PolicyParams& params)
    : params_(params), cache_(params.grid().num_grid_states()) {}

const StateOutputs& EvaluatedPolicy::outputs(StateId s) {
  if (s >= cache_.size()) throw std::out_of_range(fmt::format("state {} is not a grid state", s));
  if (!cache_[s]) cache_[s] = evaluate_state(params_, s);
  return *cache_[s];
}

double EvaluatedPolicy::log_backward(StateId s, std::size_t parent) {
  const auto& lb = outputs(s).log_backward;
  if (lb.empty()) throw std::invalid_argument("the source has no parents");
  return lb.at(parent);
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string format_modes(const std::vector<ModeRegion>& modes) {
  if (modes.empty()) return "none";
  std::string out;
  for (const auto& m : modes) {
    if (!out.empty()) out += ',';
    out += fmt::format("{}:{}:{}:{}", m.a_lo, m.a_hi, m.b_lo, m.b_hi);
  }
  return out;
}

std::vector<ModeRegion> parse_modes(std::string_view text) {
  std::vector<ModeRegion> modes;
  if (text == "none" || text.empty()) return modes;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    ModeRegion m;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream fields(item);
    if (!(fields >> m.a_lo >> c1 >> m.a_hi >> c2 >> m.b_lo >> c3 >> m.b_hi) || c1 != ':' || c2 != ':' || c3 != ':' ||
        !(fields >> std::ws).eof()) {
      throw std::invalid_argument(fmt::format("malformed mode region '{}' (expected a_lo:a_hi:b_lo:b_hi)", item));
    }
    modes.push_back(m);
  }
  return modes;
}

void save_checkpoint(std::ostream& out, const GridSpec& grid, const PolicyParams& params) {
  const auto& cfg = params.config();
  if (grid.side != cfg.grid_side) throw std::invalid_argument("checkpoint grid does not match the policy");
  out << "gflow-lab-checkpoint 1\n";
  out << "grid_side " << grid.side << '\n';
  out << "modes " << format_modes(grid.modes) << '\n';
  out << "hidden_width " << cfg.hidden_width << '\n';
  out << "encoding " << to_string(cfg.encoding) << '\n';
  out << "parametrization " << to_string(cfg.parametrization) << '\n';
  out << "learned_backward " << (cfg.learned_backward ? 1 : 0) << '\n';
  for (const auto& [name, slice] : params.slices()) {
    out << "slice " << name << ' ' << slice.rows << ' ' << slice.cols << '\n';
    const auto v = params.slice_values(name);
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << fmt::format("{:.17g}", v[i]);
    out << '\n';
  }
  out << "end\n";
}

Checkpoint load_checkpoint(std::istream& in) {
  auto fail = [](const std::string& why) { throw std::runtime_error("bad checkpoint: " + why); };
  std::string key;
  int version = 0;
  if (!(in >> key >> version) || key != "gflow-lab-checkpoint" || version != 1) fail("missing header");

  GridSpec grid;
  PolicyConfig cfg;
  std::vector<std::pair<std::string, std::vector<double>>> slices;
  while (in >> key) {
    if (key == "end") break;
    if (key == "slice") {
      std::string name;
      std::size_t rows = 0, cols = 0;
      if (!(in >> name >> rows >> cols)) fail("malformed slice line");
      std::vector<double> v(rows * cols);
      for (double& x : v) {
        std::string token;
        if (!(in >> token)) fail("truncated slice " + name);
        x = std::stod(token);
      }
      slices.emplace_back(std::move(name), std::move(v));
      continue;
    }
    std::string value;
    if (!(in >> value)) fail("missing value for " + key);
    if (key == "grid_side") grid.side = cfg.grid_side = std::stoi(value);
    else if (key == "modes") grid.modes = parse_modes(value);
    else if (key == "hidden_width") cfg.hidden_width = std::stoi(value);
    else if (key == "encoding") cfg.encoding = parse_encoding(value);
    else if (key == "parametrization") cfg.parametrization = parse_parametrization(value);
    else if (key == "learned_backward") cfg.learned_backward = value == "1";
    else fail("unknown key " + key);
  }
  if (key != "end") fail("missing end marker");
  grid.validate();

  PolicyParams params(cfg, std::uint64_t{0});
  if (slices.size() != params.slices().size()) fail("slice count does not match the layout");
  for (const auto& [name, v] : slices) {
    auto dst = params.slice_values(name);
    if (dst.size() != v.size()) fail("shape mismatch for slice " + name);
    std::copy(v.begin(), v.end(), dst.begin());
  }
  return {std::move(grid), std::move(params)};
}

}  // namespace gflowlab
