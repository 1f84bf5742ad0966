// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Vector-valued reverse-mode automatic differentiation over a flat parameter
// vector. Nodes are appended in evaluation order, so the reverse of insertion
// order is a reverse topological order and backward() visits each node once.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gflowlab::ad {

/// A contiguous region of the flat parameter vector, row-major `rows x cols`.
struct ParamSlice {
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 1;

  std::size_t size() const { return rows * cols; }
  bool operator==(const ParamSlice&) const = default;
};

class Tape;

/// Handle to a recorded node. Cheap to copy; valid while its tape lives.
class Var {
 public:
  Var() = default;

  double value() const;  // first component; the scalar value for size-1 nodes
  std::span<const double> values() const;
  std::size_t size() const;
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  /// Parameters are read through `params`, which must outlive the tape and
  /// stay unchanged until backward() returns.
  explicit Tape(std::span<const double> params);

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(std::vector<double> values);
  Var constant(double value) { return constant(std::vector<double>{value}); }
  Var parameter(ParamSlice slice);

  /// weight * x + bias with weight of shape (out, in).
  Var linear(Var x, ParamSlice weight, ParamSlice bias);
  Var tanh(Var x);
  /// Log-softmax restricted to `active` logits; output k is log p(active[k]).
  Var log_softmax(Var logits, std::vector<std::size_t> active);
  Var element(Var x, std::size_t index);

  Var add(Var x, Var y);
  Var sub(Var x, Var y);
  Var mul(Var x, Var y);
  Var scale(Var x, double factor);
  Var shift(Var x, double offset);
  Var square(Var x);
  /// Sum of scalars; an empty list gives the constant 0.
  Var sum(std::span<const Var> terms);

  /// Accumulates d(loss)/d(params). Throws std::logic_error if called twice
  /// or if `loss` is not a scalar of this tape.
  void backward(Var loss);
  bool backward_done() const { return backward_done_; }
  const std::vector<double>& gradient() const { return param_grad_; }
  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  friend class Var;

  enum class Op : std::uint8_t {
    kConstant, kParameter, kLinear, kTanh, kLogSoftmax, kElement,
    kAdd, kSub, kMul, kScale, kShift, kSquare, kSum,
  };

  struct Node {
    Op op = Op::kConstant;
    bool requires_grad = false;
    std::vector<double> value;
    std::vector<double> grad;
    std::size_t a = 0;
    std::size_t b = 0;
    double c = 0.0;
    ParamSlice weight;
    ParamSlice bias;
    std::vector<std::size_t> aux;
  };

  Var push(Node node);
  const Node& node(Var v) const;
  void check_same_tape(Var v) const;

  std::span<const double> params_;
  std::vector<Node> nodes_;
  std::vector<double> param_grad_;
  bool backward_done_ = false;
};

Var operator+(Var x, Var y);
Var operator-(Var x, Var y);
Var operator*(Var x, Var y);
Var operator+(Var x, double c);
Var operator+(double c, Var x);
Var operator-(Var x, double c);
Var operator-(double c, Var x);
Var operator*(double c, Var x);
Var operator*(Var x, double c);
Var operator-(Var x);
Var square(Var x);

inline double square(double x) { return x * x; }
inline double value_of(double x) { return x; }
inline double value_of(Var x) { return x.value(); }

}  // namespace gflowlab::ad
