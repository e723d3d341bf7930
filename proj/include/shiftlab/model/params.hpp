// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "shiftlab/autodiff/tape.hpp"

namespace shiftlab::model {

/// y = x W + b, W is [in x out].
struct Linear {
  ad::Tensor weight;
  ad::Tensor bias;
};

/// Two linear layers with a ReLU between them.
struct Mlp {
  Linear hidden;
  Linear out;
};

/// Sum-aggregation message passing: h' = MLP(h_v + sum_u m_uv h_u).
struct EncoderParams {
  std::vector<Mlp> layers;
};

/// Mask generation network: its own encoder, a node head (width -> 1) and an
/// edge head (2 * width -> 1), each followed by a sigmoid.
struct MaskNetParams {
  EncoderParams encoder;
  Mlp node_head;
  Mlp edge_head;
};

struct ClassifierParams {
  Linear head;
};

struct ModelConfig {
  std::size_t in_dim = 5;
  std::size_t num_classes = 3;
  std::size_t layers = 3;
  std::size_t width = 32;
  std::size_t mask_layers = 2;
  std::size_t mask_width = 32;

  bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// Everything a run trains: shared encoder + classifier, stable feature
/// generator and adversarial augmenter.
struct ModelParams {
  ModelConfig config;
  EncoderParams encoder;
  ClassifierParams classifier;
  MaskNetParams stable_gen;
  MaskNetParams augmenter;
};

enum class ParamGroup { kEncoder, kClassifier, kStableGen, kAugmenter };

using ParamVisitor = std::function<void(const std::string& name, ParamGroup group, ad::Tensor& t)>;
void for_each_param(ModelParams& p, const ParamVisitor& f);

/// Pointers to every parameter tensor of the listed groups, in a fixed order.
std::vector<ad::Tensor*> params_in(ModelParams& p, std::initializer_list<ParamGroup> groups);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases, seeded.
ModelParams init_model(const ModelConfig& config, std::uint64_t seed);

/// Zero the two MLP heads of a mask network (every mask becomes exactly 0.5).
void zero_mask_heads(MaskNetParams& m);

/// FNV-1a over the raw bytes of a set of tensors.
std::uint64_t hash_tensors(const std::vector<ad::Tensor*>& ts);

/// Binds parameter tensors onto a tape. Tensors registered with track() become
/// tracked leaves, everything else is bound as a constant. Each tensor is
/// bound once per binder.
class ParamBinder {
 public:
  explicit ParamBinder(ad::Tape& tape) : tape_(tape) {}

  void track(const ad::Tensor* t) { tracked_.insert(t); }
  void track(const std::vector<ad::Tensor*>& ts) {
    for (auto* t : ts) tracked_.insert(t);
  }

  /// Binds `t` to an existing Var (e.g. a perturbed copy under gradient check).
  void preset(const ad::Tensor* t, ad::Var v) { bound_[t] = v; }

  ad::Var operator()(const ad::Tensor& t);
  ad::Tape& tape() { return tape_; }

  /// Gradient of a tracked tensor after backward (zeros if it was never bound).
  ad::Tensor grad(const ad::Gradients& grads, const ad::Tensor& t) const;

 private:
  ad::Tape& tape_;
  std::unordered_set<const ad::Tensor*> tracked_;
  std::unordered_map<const ad::Tensor*, ad::Var> bound_;
};

/// Checkpoint: {"epoch":e,"config":{...},"params":{name:{"shape":[...],"data":[...]}}}
nlohmann::json checkpoint_json(const ModelParams& p, std::size_t epoch);
ModelParams params_from_checkpoint(const nlohmann::json& j);

}  // namespace shiftlab::model
