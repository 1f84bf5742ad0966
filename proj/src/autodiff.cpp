// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "gflowlab/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gflowlab::ad {

double Var::value() const { return tape_->node(*this).value.front(); }
std::span<const double> Var::values() const { return tape_->node(*this).value; }
std::size_t Var::size() const { return tape_->node(*this).value.size(); }

Tape::Tape(std::span<const double> params) : params_(params), param_grad_(params.size(), 0.0) {
  nodes_.reserve(256);
}

Var Tape::push(Node node) {
  if (backward_done_) throw std::logic_error("cannot record on a tape after backward()");
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tape::Node& Tape::node(Var v) const {
  check_same_tape(v);
  return nodes_[v.id_];
}

void Tape::check_same_tape(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) throw std::invalid_argument("variable belongs to another tape");
}

Var Tape::constant(std::vector<double> values) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(values);
  return push(std::move(n));
}

Var Tape::parameter(ParamSlice slice) {
  if (slice.offset + slice.size() > params_.size()) throw std::out_of_range("parameter slice out of range");
  Node n;
  n.op = Op::kParameter;
  n.requires_grad = true;
  n.weight = slice;
  n.value.assign(params_.begin() + static_cast<std::ptrdiff_t>(slice.offset),
                 params_.begin() + static_cast<std::ptrdiff_t>(slice.offset + slice.size()));
  return push(std::move(n));
}

Var Tape::linear(Var x, ParamSlice weight, ParamSlice bias) {
  const Node& in = node(x);
  const std::size_t n_in = weight.cols;
  const std::size_t n_out = weight.rows;
  if (in.value.size() != n_in || bias.size() != n_out) throw std::invalid_argument("linear: shape mismatch");
  if (weight.offset + weight.size() > params_.size() || bias.offset + bias.size() > params_.size()) {
    throw std::out_of_range("linear: parameter slice out of range");
  }
  Node n;
  n.op = Op::kLinear;
  n.requires_grad = true;
  n.a = x.id_;
  n.weight = weight;
  n.bias = bias;
  // Nonzero input positions; one-hot encodings make this short.
  for (std::size_t j = 0; j < n_in; ++j) {
    if (in.value[j] != 0.0) n.aux.push_back(j);
  }
  n.value.resize(n_out);
  const double* w = params_.data() + weight.offset;
  const double* b = params_.data() + bias.offset;
  for (std::size_t i = 0; i < n_out; ++i) {
    double acc = b[i];
    const double* row = w + i * n_in;
    for (std::size_t j : n.aux) acc += row[j] * in.value[j];
    n.value[i] = acc;
  }
  return push(std::move(n));
}

Var Tape::tanh(Var x) {
  const Node& in = node(x);
  Node n;
  n.op = Op::kTanh;
  n.requires_grad = in.requires_grad;
  n.a = x.id_;
  n.value.resize(in.value.size());
  std::transform(in.value.begin(), in.value.end(), n.value.begin(), [](double v) { return std::tanh(v); });
  return push(std::move(n));
}

Var Tape::log_softmax(Var logits, std::vector<std::size_t> active) {
  const Node& in = node(logits);
  if (active.empty()) throw std::invalid_argument("log_softmax: no active entries");
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t k : active) {
    if (k >= in.value.size()) throw std::out_of_range("log_softmax: active index out of range");
    peak = std::max(peak, in.value[k]);
  }
  double total = 0.0;
  for (std::size_t k : active) total += std::exp(in.value[k] - peak);
  const double log_norm = peak + std::log(total);
  Node n;
  n.op = Op::kLogSoftmax;
  n.requires_grad = in.requires_grad;
  n.a = logits.id_;
  n.value.reserve(active.size());
  for (std::size_t k : active) n.value.push_back(in.value[k] - log_norm);
  n.aux = std::move(active);
  return push(std::move(n));
}

Var Tape::element(Var x, std::size_t index) {
  const Node& in = node(x);
  if (index >= in.value.size()) throw std::out_of_range("element: index out of range");
  Node n;
  n.op = Op::kElement;
  n.requires_grad = in.requires_grad;
  n.a = x.id_;
  n.aux = {index};
  n.value = {in.value[index]};
  return push(std::move(n));
}

namespace {
void require_same_size(std::size_t x, std::size_t y) {
  if (x != y) throw std::invalid_argument("elementwise op: size mismatch");
}
}  // namespace

Var Tape::add(Var x, Var y) {
  const Node& nx = node(x);
  const Node& ny = node(y);
  require_same_size(nx.value.size(), ny.value.size());
  Node n;
  n.op = Op::kAdd;
  n.requires_grad = nx.requires_grad || ny.requires_grad;
  n.a = x.id_;
  n.b = y.id_;
  n.value.resize(nx.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = nx.value[i] + ny.value[i];
  return push(std::move(n));
}

Var Tape::sub(Var x, Var y) {
  const Node& nx = node(x);
  const Node& ny = node(y);
  require_same_size(nx.value.size(), ny.value.size());
  Node n;
  n.op = Op::kSub;
  n.requires_grad = nx.requires_grad || ny.requires_grad;
  n.a = x.id_;
  n.b = y.id_;
  n.value.resize(nx.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = nx.value[i] - ny.value[i];
  return push(std::move(n));
}

Var Tape::mul(Var x, Var y) {
  const Node& nx = node(x);
  const Node& ny = node(y);
  require_same_size(nx.value.size(), ny.value.size());
  Node n;
  n.op = Op::kMul;
  n.requires_grad = nx.requires_grad || ny.requires_grad;
  n.a = x.id_;
  n.b = y.id_;
  n.value.resize(nx.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = nx.value[i] * ny.value[i];
  return push(std::move(n));
}

Var Tape::scale(Var x, double factor) {
  const Node& in = node(x);
  Node n;
  n.op = Op::kScale;
  n.requires_grad = in.requires_grad;
  n.a = x.id_;
  n.c = factor;
  n.value.resize(in.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = factor * in.value[i];
  return push(std::move(n));
}

Var Tape::shift(Var x, double offset) {
  const Node& in = node(x);
  Node n;
  n.op = Op::kShift;
  n.requires_grad = in.requires_grad;
  n.a = x.id_;
  n.value.resize(in.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = in.value[i] + offset;
  return push(std::move(n));
}

Var Tape::square(Var x) {
  const Node& in = node(x);
  Node n;
  n.op = Op::kSquare;
  n.requires_grad = in.requires_grad;
  n.a = x.id_;
  n.value.resize(in.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = in.value[i] * in.value[i];
  return push(std::move(n));
}

Var Tape::sum(std::span<const Var> terms) {
  Node n;
  n.op = Op::kSum;
  double total = 0.0;
  for (Var t : terms) {
    const Node& in = node(t);
    if (in.value.size() != 1) throw std::invalid_argument("sum: terms must be scalars");
    total += in.value[0];
    n.requires_grad = n.requires_grad || in.requires_grad;
    n.aux.push_back(t.id_);
  }
  n.value = {total};
  return push(std::move(n));
}

void Tape::backward(Var loss) {
  if (backward_done_) throw std::logic_error("backward() already ran on this tape");
  if (node(loss).value.size() != 1) throw std::invalid_argument("backward() needs a scalar loss");
  backward_done_ = true;

  for (std::size_t i = 0; i <= loss.id_; ++i) {
    if (nodes_[i].requires_grad) nodes_[i].grad.assign(nodes_[i].value.size(), 0.0);
  }
  if (!nodes_[loss.id_].requires_grad) return;
  nodes_[loss.id_].grad[0] = 1.0;

  for (std::size_t id = loss.id_ + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad) continue;
    const std::vector<double>& g = n.grad;
    switch (n.op) {
      case Op::kConstant:
        break;
      case Op::kParameter:
        for (std::size_t i = 0; i < g.size(); ++i) param_grad_[n.weight.offset + i] += g[i];
        break;
      case Op::kLinear: {
        Node& in = nodes_[n.a];
        const std::size_t n_in = n.weight.cols;
        const double* w = params_.data() + n.weight.offset;
        double* gw = param_grad_.data() + n.weight.offset;
        double* gb = param_grad_.data() + n.bias.offset;
        for (std::size_t i = 0; i < g.size(); ++i) {
          gb[i] += g[i];
          if (g[i] == 0.0) continue;
          double* grow = gw + i * n_in;
          for (std::size_t j : n.aux) grow[j] += g[i] * in.value[j];
        }
        if (in.requires_grad) {
          for (std::size_t i = 0; i < g.size(); ++i) {
            if (g[i] == 0.0) continue;
            const double* row = w + i * n_in;
            for (std::size_t j = 0; j < n_in; ++j) in.grad[j] += row[j] * g[i];
          }
        }
        break;
      }
      case Op::kTanh: {
        Node& in = nodes_[n.a];
        for (std::size_t i = 0; i < g.size(); ++i) in.grad[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
        break;
      }
      case Op::kLogSoftmax: {
        Node& in = nodes_[n.a];
        double total = 0.0;
        for (double gi : g) total += gi;
        for (std::size_t k = 0; k < n.aux.size(); ++k) in.grad[n.aux[k]] += g[k] - std::exp(n.value[k]) * total;
        break;
      }
      case Op::kElement:
        nodes_[n.a].grad[n.aux[0]] += g[0];
        break;
      case Op::kAdd:
      case Op::kSub: {
        const double sign = n.op == Op::kAdd ? 1.0 : -1.0;
        if (nodes_[n.a].requires_grad) {
          for (std::size_t i = 0; i < g.size(); ++i) nodes_[n.a].grad[i] += g[i];
        }
        if (nodes_[n.b].requires_grad) {
          for (std::size_t i = 0; i < g.size(); ++i) nodes_[n.b].grad[i] += sign * g[i];
        }
        break;
      }
      case Op::kMul: {
        Node& x = nodes_[n.a];
        Node& y = nodes_[n.b];
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (x.requires_grad) x.grad[i] += g[i] * y.value[i];
          if (y.requires_grad) y.grad[i] += g[i] * x.value[i];
        }
        break;
      }
      case Op::kScale: {
        Node& in = nodes_[n.a];
        for (std::size_t i = 0; i < g.size(); ++i) in.grad[i] += n.c * g[i];
        break;
      }
      case Op::kShift: {
        Node& in = nodes_[n.a];
        for (std::size_t i = 0; i < g.size(); ++i) in.grad[i] += g[i];
        break;
      }
      case Op::kSquare: {
        Node& in = nodes_[n.a];
        for (std::size_t i = 0; i < g.size(); ++i) in.grad[i] += 2.0 * in.value[i] * g[i];
        break;
      }
      case Op::kSum:
        for (std::size_t t : n.aux) {
          if (nodes_[t].requires_grad) nodes_[t].grad[0] += g[0];
        }
        break;
    }
  }
}

Var operator+(Var x, Var y) { return x.tape()->add(x, y); }
Var operator-(Var x, Var y) { return x.tape()->sub(x, y); }
Var operator*(Var x, Var y) { return x.tape()->mul(x, y); }
Var operator+(Var x, double c) { return x.tape()->shift(x, c); }
Var operator+(double c, Var x) { return x.tape()->shift(x, c); }
Var operator-(Var x, double c) { return x.tape()->shift(x, -c); }
Var operator-(double c, Var x) { return x.tape()->shift(x.tape()->scale(x, -1.0), c); }
Var operator*(double c, Var x) { return x.tape()->scale(x, c); }
Var operator*(Var x, double c) { return x.tape()->scale(x, c); }
Var operator-(Var x) { return x.tape()->scale(x, -1.0); }
Var square(Var x) { return x.tape()->square(x); }

}  // namespace gflowlab::ad
