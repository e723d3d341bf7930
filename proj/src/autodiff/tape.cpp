// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/autodiff/tape.hpp"

#include "shiftlab/errors.hpp"

namespace shiftlab::ad {

const Tensor& Var::value() const {
  if (!tape_) throw ContractError("use of an unbound Var");
  return tape_->value(id_);
}

bool Var::tracked() const { return tape_ && tape_->tracked(id_); }

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node& node = nodes_.emplace_back();
  node.value = std::move(value);
  node.tracked = requires_grad;
  node.leaf = true;
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward) {
  bool any_tracked = false;
  for (const Var& p : parents) {
    if (p.tape_ != this) throw ContractError("operands recorded on different tapes");
    any_tracked = any_tracked || nodes_[p.id_].tracked;
  }
  Node& node = nodes_.emplace_back();
  node.value = std::move(value);
  node.tracked = any_tracked;
  if (any_tracked) node.backward = std::move(backward);
  return Var(this, nodes_.size() - 1);
}

Tensor* Tape::grad_of(std::size_t id) {
  Node& node = nodes_[id];
  if (!node.tracked) return nullptr;
  if (node.grad.size() != node.value.size()) node.grad = Tensor(node.value.shape(), 0.0);
  return &node.grad;
}

Gradients Tape::backward(Var loss) {
  if (loss.tape_ != this) throw ContractError("loss belongs to another tape");
  if (value(loss.id_).size() != 1) {
    throw ContractError("backward needs a scalar loss, got " + shape_str(value(loss.id_).shape()));
  }
  if (!tracked(loss.id_)) throw ContractError("backward on an untracked loss");

  grad_of(loss.id_)->storage()[0] = 1.0;
  for (std::size_t k = loss.id_ + 1; k-- > 0;) {
    Node& node = nodes_[k];
    if (!node.tracked || !node.backward || node.grad.empty()) continue;
    node.backward(*this, node.grad);
  }

  Gradients grads;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    Node& node = nodes_[k];
    if (!node.leaf || !node.tracked) continue;
    if (node.grad.size() != node.value.size()) node.grad = Tensor(node.value.shape(), 0.0);
    grads.emplace(k, std::move(node.grad));
  }
  nodes_.clear();
  return grads;
}

}  // namespace shiftlab::ad
