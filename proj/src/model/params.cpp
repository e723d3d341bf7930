// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/model/params.hpp"

#include <cmath>
#include <cstring>

#include "shiftlab/errors.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab::model {
namespace {

Linear make_linear(std::size_t in, std::size_t out) { return {ad::Tensor({in, out}), ad::Tensor({out})}; }

Mlp make_mlp(std::size_t in, std::size_t hidden, std::size_t out) {
  return {make_linear(in, hidden), make_linear(hidden, out)};
}

EncoderParams make_encoder(std::size_t in, std::size_t width, std::size_t layers) {
  EncoderParams e;
  for (std::size_t l = 0; l < layers; ++l) e.layers.push_back(make_mlp(l == 0 ? in : width, width, width));
  return e;
}

MaskNetParams make_masknet(std::size_t in, std::size_t width, std::size_t layers) {
  return {make_encoder(in, width, layers), make_mlp(width, width, 1), make_mlp(2 * width, width, 1)};
}

void visit_linear(const std::string& name, ParamGroup g, Linear& l, const ParamVisitor& f) {
  f(name + ".weight", g, l.weight);
  f(name + ".bias", g, l.bias);
}

void visit_mlp(const std::string& name, ParamGroup g, Mlp& m, const ParamVisitor& f) {
  visit_linear(name + ".hidden", g, m.hidden, f);
  visit_linear(name + ".out", g, m.out, f);
}

void visit_encoder(const std::string& name, ParamGroup g, EncoderParams& e, const ParamVisitor& f) {
  for (std::size_t l = 0; l < e.layers.size(); ++l) visit_mlp(name + ".layer" + std::to_string(l), g, e.layers[l], f);
}

void visit_masknet(const std::string& name, ParamGroup g, MaskNetParams& m, const ParamVisitor& f) {
  visit_encoder(name + ".encoder", g, m.encoder, f);
  visit_mlp(name + ".node_head", g, m.node_head, f);
  visit_mlp(name + ".edge_head", g, m.edge_head, f);
}

void fill_uniform(Linear& l, Stream& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(l.weight.rows()));
  for (double& v : l.weight.storage()) v = rng.uniform(-bound, bound);
  for (double& v : l.bias.storage()) v = rng.uniform(-bound, bound);
}

}  // namespace

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"in_dim", c.in_dim},   {"num_classes", c.num_classes}, {"layers", c.layers},
       {"width", c.width},     {"mask_layers", c.mask_layers}, {"mask_width", c.mask_width}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.in_dim = j.at("in_dim").get<std::size_t>();
  c.num_classes = j.at("num_classes").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.width = j.at("width").get<std::size_t>();
  c.mask_layers = j.at("mask_layers").get<std::size_t>();
  c.mask_width = j.at("mask_width").get<std::size_t>();
}

void for_each_param(ModelParams& p, const ParamVisitor& f) {
  visit_encoder("encoder", ParamGroup::kEncoder, p.encoder, f);
  visit_linear("classifier.head", ParamGroup::kClassifier, p.classifier.head, f);
  visit_masknet("stable_gen", ParamGroup::kStableGen, p.stable_gen, f);
  visit_masknet("augmenter", ParamGroup::kAugmenter, p.augmenter, f);
}

std::vector<ad::Tensor*> params_in(ModelParams& p, std::initializer_list<ParamGroup> groups) {
  std::vector<ad::Tensor*> out;
  for_each_param(p, [&](const std::string&, ParamGroup g, ad::Tensor& t) {
    for (ParamGroup want : groups) {
      if (g == want) {
        out.push_back(&t);
        break;
      }
    }
  });
  return out;
}

ModelParams init_model(const ModelConfig& c, std::uint64_t seed) {
  if (c.layers == 0 || c.width == 0 || c.mask_layers == 0 || c.mask_width == 0 || c.in_dim == 0 ||
      c.num_classes < 2) {
    throw ContractError("model config needs positive widths/layers and at least two classes");
  }
  ModelParams p;
  p.config = c;
  p.encoder = make_encoder(c.in_dim, c.width, c.layers);
  p.classifier.head = make_linear(c.width, c.num_classes);
  p.stable_gen = make_masknet(c.in_dim, c.mask_width, c.mask_layers);
  p.augmenter = make_masknet(c.in_dim, c.mask_width, c.mask_layers);

  std::uint64_t index = 0;
  auto init = [&](Linear& l) {
    Stream rng{seed, 0x1417ULL, index++};
    fill_uniform(l, rng);
  };
  auto init_mlp = [&](Mlp& m) {
    init(m.hidden);
    init(m.out);
  };
  for (auto& m : p.encoder.layers) init_mlp(m);
  init(p.classifier.head);
  for (MaskNetParams* mn : {&p.stable_gen, &p.augmenter}) {
    for (auto& m : mn->encoder.layers) init_mlp(m);
    init_mlp(mn->node_head);
    init_mlp(mn->edge_head);
  }
  return p;
}

void zero_mask_heads(MaskNetParams& m) {
  for (Mlp* mlp : {&m.node_head, &m.edge_head}) {
    for (Linear* l : {&mlp->hidden, &mlp->out}) {
      std::fill(l->weight.storage().begin(), l->weight.storage().end(), 0.0);
      std::fill(l->bias.storage().begin(), l->bias.storage().end(), 0.0);
    }
  }
}

std::uint64_t hash_tensors(const std::vector<ad::Tensor*>& ts) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const ad::Tensor* t : ts) {
    for (double v : t->data()) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xFF;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

ad::Var ParamBinder::operator()(const ad::Tensor& t) {
  auto it = bound_.find(&t);
  if (it != bound_.end()) return it->second;
  ad::Var v = tape_.leaf(t, tracked_.contains(&t));
  bound_.emplace(&t, v);
  return v;
}

ad::Tensor ParamBinder::grad(const ad::Gradients& grads, const ad::Tensor& t) const {
  auto it = bound_.find(&t);
  if (it != bound_.end()) {
    auto g = grads.find(it->second.id());
    if (g != grads.end()) return g->second;
  }
  return ad::Tensor(t.shape(), 0.0);
}

nlohmann::json checkpoint_json(const ModelParams& p, std::size_t epoch) {
  nlohmann::json params = nlohmann::json::object();
  for_each_param(const_cast<ModelParams&>(p), [&](const std::string& name, ParamGroup, ad::Tensor& t) {
    params[name] = {{"shape", t.shape()}, {"data", t.storage()}};
  });
  return {{"epoch", epoch}, {"config", p.config}, {"params", std::move(params)}};
}

ModelParams params_from_checkpoint(const nlohmann::json& j) {
  ModelParams p = init_model(j.at("config").get<ModelConfig>(), 0);
  const auto& params = j.at("params");
  for_each_param(p, [&](const std::string& name, ParamGroup, ad::Tensor& t) {
    if (!params.contains(name)) throw ContractError("checkpoint lacks parameter '" + name + "'");
    ad::Tensor loaded(params[name].at("shape").get<ad::Shape>(), params[name].at("data").get<std::vector<double>>());
    if (loaded.shape() != t.shape()) throw DimensionError("checkpoint shape mismatch for '" + name + "'");
    t = std::move(loaded);
  });
  return p;
}

}  // namespace shiftlab::model
