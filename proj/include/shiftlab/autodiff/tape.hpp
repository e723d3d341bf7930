// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <unordered_map>

#include "shiftlab/autodiff/tensor.hpp"

namespace shiftlab::ad {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid until the tape
/// is cleared.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool tracked() const;
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Leaf node id -> gradient of the loss with respect to that leaf.
using Gradients = std::unordered_map<std::size_t, Tensor>;

/// Append-only record of operations. Nodes whose parents are all untracked are
/// stored as constants and never visited by backward.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  /// Records an op result. The backward closure runs only if some parent is
  /// tracked; it must push gradient into parents through grad_of().
  Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool tracked(std::size_t id) const { return nodes_[id].tracked; }

  /// Gradient accumulator of a tracked node (zero-initialised on first use),
  /// or nullptr for constants.
  Tensor* grad_of(std::size_t id);

  /// Reverse sweep from a scalar tracked loss. Returns the gradient of every
  /// tracked leaf (zero when the loss does not depend on it) and clears the tape.
  Gradients backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool tracked = false;
    bool leaf = false;
  };

  std::deque<Node> nodes_;
};

}  // namespace shiftlab::ad
