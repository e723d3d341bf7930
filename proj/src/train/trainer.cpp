// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/train/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "shiftlab/errors.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab::train {

using ad::Var;
using model::ParamBinder;
using model::ParamGroup;

namespace {

constexpr std::uint64_t kShuffleStream = 0x5417;
constexpr std::uint64_t kDropoutStream = 0xD80F;
constexpr std::uint64_t kDropEdgeStream = 0xDE06;
constexpr std::uint64_t kInitStream = 0x1A17;

struct MethodName {
  Method method;
  const char* name;
};

constexpr MethodName kMethodNames[] = {{Method::kMpaiacl, "mpaiacl"},          {Method::kWoCl, "wo_cl"},
                                       {Method::kWoDis, "wo_dis"},            {Method::kAiaAblation, "aia_ablation"},
                                       {Method::kErm, "erm"},                 {Method::kDropEdge, "dropedge"}};

std::vector<ad::Tensor> collect_grads(const ParamBinder& bind, const ad::Gradients& grads,
                                      const std::vector<ad::Tensor*>& params) {
  std::vector<ad::Tensor> out;
  out.reserve(params.size());
  for (const ad::Tensor* p : params) out.push_back(bind.grad(grads, *p));
  return out;
}

std::size_t count_correct(const ad::Tensor& probs, std::span<const std::size_t> labels) {
  std::size_t correct = 0;
  const std::size_t c = probs.cols();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < c; ++k)
      if (probs.at(i, k) > probs.at(i, best)) best = k;
    if (best == labels[i]) ++correct;
  }
  return correct;
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Stream rng{seed, kShuffleStream, epoch};
  rng.shuffle(order.begin(), order.end());
  return order;
}

nlohmann::json stats_json(const SplitStats& s) { return {{"loss", s.loss}, {"accuracy", s.accuracy}, {"count", s.count}}; }

SplitStats stats_from_json(const nlohmann::json& j) {
  return {j.at("loss").get<double>(), j.at("accuracy").get<double>(), j.at("count").get<std::size_t>()};
}

}  // namespace

std::string to_string(Method m) {
  for (const auto& [method, name] : kMethodNames)
    if (method == m) return name;
  return "unknown";
}

Method parse_method(const std::string& s) {
  std::string valid;
  for (const auto& [method, name] : kMethodNames) {
    if (s == name) return method;
    valid += valid.empty() ? "" : ", ";
    valid += name;
  }
  throw ContractError("unknown method '" + s + "' (valid: " + valid + ")");
}

bool is_adversarial(Method m) { return m != Method::kErm && m != Method::kDropEdge; }

void TrainConfig::validate() const {
  weights.validate();
  if (batch_size == 0) throw ContractError("batch_size must be >= 1");
  if (eval_batch == 0) throw ContractError("eval_batch must be >= 1");
  if (dropedge_p < 0.0 || dropedge_p >= 1.0) throw ContractError("dropedge_p must lie in [0, 1)");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ContractError("dropout_rate must lie in [0, 1)");
  if (grad_clip < 0.0) throw ContractError("grad_clip must be >= 0 (0 disables clipping)");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"method", to_string(c.method)},
       {"use_cl", c.use_cl()},
       {"use_dis", c.use_dis()},
       {"weights", c.weights},
       {"lr", c.adam.lr},
       {"beta1", c.adam.beta1},
       {"beta2", c.adam.beta2},
       {"adam_eps", c.adam.eps},
       {"epochs", c.epochs},
       {"batch_size", c.batch_size},
       {"seed", c.seed},
       {"dropedge_p", c.dropedge_p},
       {"dropout_rate", c.dropout_rate},
       {"grad_clip", c.grad_clip},
       {"eval_batch", c.eval_batch},
       {"model", c.model}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  std::optional<bool> use_cl, use_dis;
  for (const auto& [key, v] : j.items()) {
    if (key == "method") c.method = parse_method(v.get<std::string>());
    else if (key == "use_cl") use_cl = v.get<bool>();
    else if (key == "use_dis") use_dis = v.get<bool>();
    else if (key == "weights") c.weights = v.get<obj::LossWeights>();
    else if (key == "lr") c.adam.lr = v.get<double>();
    else if (key == "beta1") c.adam.beta1 = v.get<double>();
    else if (key == "beta2") c.adam.beta2 = v.get<double>();
    else if (key == "adam_eps") c.adam.eps = v.get<double>();
    else if (key == "epochs") c.epochs = v.get<std::size_t>();
    else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "dropedge_p") c.dropedge_p = v.get<double>();
    else if (key == "dropout_rate") c.dropout_rate = v.get<double>();
    else if (key == "grad_clip") c.grad_clip = v.get<double>();
    else if (key == "eval_batch") c.eval_batch = v.get<std::size_t>();
    else if (key == "model") {
      nlohmann::json merged = c.model;
      for (const auto& [mk, mv] : v.items()) {
        if (!merged.contains(mk)) throw ContractError("unknown model key '" + mk + "'");
        merged[mk] = mv;
      }
      c.model = merged.get<model::ModelConfig>();
    } else {
      throw ContractError("unknown train key '" + key + "'");
    }
  }
  if (!use_cl && !use_dis) return;
  if (!is_adversarial(c.method)) throw ContractError("use_cl/use_dis apply only to adversarial methods");
  const bool cl = use_cl.value_or(c.use_cl());
  const bool dis = use_dis.value_or(c.use_dis());
  const Method resolved = cl ? (dis ? Method::kMpaiacl : Method::kWoDis) : (dis ? Method::kWoCl : Method::kAiaAblation);
  if (c.method != Method::kMpaiacl && resolved != c.method) {
    throw ContractError("use_cl/use_dis contradict method '" + to_string(c.method) + "'");
  }
  c.method = resolved;
}

std::string config_hash(const TrainConfig& c) {
  const std::string text = nlohmann::json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

AdversarialTerms build_adversarial(ParamBinder& bind, const model::ModelParams& p, const graph::GraphBatch& b,
                                   const TrainConfig& c, std::uint64_t dropout_seed) {
  graph::MaskVars stable = model::gen_masks(bind, p.stable_gen, b);
  graph::MaskVars env = model::env_masks_from_stable(stable);
  graph::MaskVars adv = model::gen_masks(bind, p.augmenter, b);
  graph::MaskVars env_pert{ad::mul(env.node, adv.node), ad::mul(env.edge, adv.edge)};

  Var h_e = model::encode(bind, p.encoder, graph::MaskedView::masked(b, env_pert));
  Var h_da = model::encode(bind, p.encoder, graph::compose_da_graph(b, stable, env_pert));
  Var pred_da = model::classify(bind, p.classifier, h_da);

  AdversarialTerms t;
  t.sup_da = obj::cross_entropy(pred_da, b.labels);
  t.env_reg = obj::env_reg(adv);
  obj::LossWeights w = c.weights;
  if (c.use_dis()) {
    Var h_o = model::encode(bind, p.encoder, graph::MaskedView::raw(b));
    Var h_o_drop = ad::dropout(h_o, c.dropout_rate, dropout_seed);
    t.triplet = obj::triplet(h_o, h_o_drop, h_e, w.alpha_margin);
  } else {
    t.triplet = bind.tape().constant(ad::Tensor::scalar(0.0));
    w.alpha_adv = 0.0;
  }
  t.total = obj::adversarial_objective(t.sup_da, t.triplet, t.env_reg, w);
  return t;
}

StableTerms build_stable(ParamBinder& bind, const model::ModelParams& p, const graph::GraphBatch& b,
                         const TrainConfig& c) {
  graph::MaskVars stable = model::gen_masks(bind, p.stable_gen, b);
  graph::MaskVars env = model::env_masks_from_stable(stable);
  graph::MaskVars adv = model::gen_masks(bind, p.augmenter, b);
  graph::MaskVars env_pert{ad::mul(env.node, adv.node), ad::mul(env.edge, adv.edge)};

  obj::EmbeddingTriple triple;
  triple.h_s = model::encode(bind, p.encoder, graph::MaskedView::masked(b, stable));
  triple.h_da = model::encode(bind, p.encoder, graph::compose_da_graph(b, stable, env_pert));
  StableTerms t;
  t.pred_std = model::classify(bind, p.classifier, triple.h_s);
  Var pred_da = model::classify(bind, p.classifier, triple.h_da);
  t.stable_reg = obj::stable_reg(t.pred_std, pred_da, b.labels);
  if (c.use_cl()) {
    triple.h_e = model::encode(bind, p.encoder, graph::MaskedView::masked(b, env_pert));
    t.info_nce = obj::info_nce(triple.h_da, triple.h_s, triple.h_e, c.weights.tau);
    t.total = c.weights.lambda == 0.0 ? t.stable_reg : ad::add(t.stable_reg, ad::mul_scalar(t.info_nce, c.weights.lambda));
  } else {
    t.info_nce = bind.tape().constant(ad::Tensor::scalar(0.0));
    t.total = t.stable_reg;
  }
  return t;
}

ad::Tensor dropedge_mask(std::size_t num_edges, double p, std::uint64_t seed, std::uint64_t step) {
  ad::Tensor mask({num_edges}, 1.0);
  Stream rng{seed, kDropEdgeStream, step};
  for (std::size_t e = 0; e < num_edges; ++e)
    if (rng.uniform() < p) mask[e] = 0.0;
  return mask;
}

Trainer::Trainer(model::ModelParams& params, const TrainConfig& config)
    : params_(params),
      config_(config),
      aug_params_(model::params_in(params, {ParamGroup::kAugmenter})),
      main_params_(is_adversarial(config.method)
                       ? model::params_in(params, {ParamGroup::kEncoder, ParamGroup::kClassifier, ParamGroup::kStableGen})
                       : model::params_in(params, {ParamGroup::kEncoder, ParamGroup::kClassifier})),
      main_opt_(main_params_, config.adam) {
  config_.validate();
  if (is_adversarial(config_.method)) aug_opt_.emplace(aug_params_, config_.adam);
}

StepLosses Trainer::step(const graph::GraphBatch& b) {
  if (b.num_graphs() == 0) throw ContractError("train step on an empty batch");
  StepLosses out = is_adversarial(config_.method) ? adversarial_step(b) : supervised_step(b);
  ++step_;
  return out;
}

std::uint64_t step_dropout_seed(const TrainConfig& c, std::size_t step) {
  return mix_keys({c.seed, kDropoutStream, step});
}

StepLosses Trainer::adversarial_step(const graph::GraphBatch& b) {
  StepLosses out;
  augmenter_step(b, out);
  stable_step(b, out);
  return out;
}

void Trainer::augmenter_step(const graph::GraphBatch& b, StepLosses& out) {
  if (!aug_opt_) throw ContractError(to_string(config_.method) + " has no augmenter");
  ad::Tape tape;
  ParamBinder bind(tape);
  bind.track(aug_params_);
  AdversarialTerms t = build_adversarial(bind, params_, b, config_, step_dropout_seed(config_, step_));
  out.adv = t.total.value().item();
  out.sup_da = t.sup_da.value().item();
  out.triplet = t.triplet.value().item();
  out.env_reg = t.env_reg.value().item();
  if (!std::isfinite(out.adv)) throw NumericError("non-finite adversarial loss");
  ad::Gradients grads = tape.backward(ad::neg(t.total));
  auto g = collect_grads(bind, grads, aug_params_);
  clip_global_norm(g, config_.grad_clip);
  aug_opt_->step(g);
}

void Trainer::stable_step(const graph::GraphBatch& b, StepLosses& out) {
  if (!aug_opt_) throw ContractError(to_string(config_.method) + " has no stable phase");
  ad::Tape tape;
  ParamBinder bind(tape);
  bind.track(main_params_);
  StableTerms t = build_stable(bind, params_, b, config_);
  out.objective = t.total.value().item();
  out.stable_reg = t.stable_reg.value().item();
  out.info_nce = config_.use_cl() ? t.info_nce.value().item() : 0.0;
  out.correct = count_correct(t.pred_std.value(), b.labels);
  out.count = b.num_graphs();
  if (!std::isfinite(out.objective)) throw NumericError("non-finite stable loss");
  ad::Gradients grads = tape.backward(t.total);
  auto g = collect_grads(bind, grads, main_params_);
  clip_global_norm(g, config_.grad_clip);
  main_opt_.step(g);
}

StepLosses Trainer::supervised_step(const graph::GraphBatch& b) {
  StepLosses out;
  ad::Tape tape;
  ParamBinder bind(tape);
  bind.track(main_params_);
  graph::MaskedView view = graph::MaskedView::raw(b);
  if (config_.method == Method::kDropEdge) {
    graph::MaskPair m{ad::Tensor({b.num_nodes()}, 1.0), dropedge_mask(b.num_edges(), config_.dropedge_p, config_.seed, step_)};
    view = graph::MaskedView::masked(b, graph::to_vars(tape, m));
  }
  Var probs = model::classify(bind, params_.classifier, model::encode(bind, params_.encoder, view));
  Var loss = obj::cross_entropy(probs, b.labels);
  out.objective = loss.value().item();
  out.correct = count_correct(probs.value(), b.labels);
  out.count = b.num_graphs();
  if (!std::isfinite(out.objective)) throw NumericError("non-finite cross-entropy");
  ad::Gradients grads = tape.backward(loss);
  auto g = collect_grads(bind, grads, main_params_);
  clip_global_norm(g, config_.grad_clip);
  main_opt_.step(g);
  return out;
}

ad::Tensor predict(const model::ModelParams& p, Method m, const graph::GraphBatch& b) {
  ad::Tape tape;
  ParamBinder bind(tape);
  graph::MaskedView view = graph::MaskedView::raw(b);
  if (is_adversarial(m)) view = graph::MaskedView::masked(b, model::gen_masks(bind, p.stable_gen, b));
  return model::classify(bind, p.classifier, model::encode(bind, p.encoder, view)).value();
}

SplitStats evaluate(const model::ModelParams& p, Method m, std::span<const graph::Graph> graphs, std::size_t eval_batch) {
  SplitStats s;
  if (graphs.empty()) return s;
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < graphs.size(); start += eval_batch) {
    const std::size_t end = std::min(graphs.size(), start + eval_batch);
    graph::GraphBatch b = graph::batch(graphs.subspan(start, end - start));
    ad::Tensor probs = predict(p, m, b);
    for (std::size_t i = 0; i < b.num_graphs(); ++i) loss -= std::log(std::max(probs.at(i, b.labels[i]), ad::kLogFloor));
    correct += count_correct(probs, b.labels);
  }
  s.count = graphs.size();
  s.loss = loss / static_cast<double>(s.count);
  s.accuracy = static_cast<double>(correct) / static_cast<double>(s.count);
  return s;
}

nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"train_adv_loss", e.train_adv_loss},
                      {"train_acc", e.train_acc},
                      {"info_nce", e.info_nce},
                      {"triplet", e.triplet},
                      {"env_reg", e.env_reg},
                      {"valid_loss", e.valid_loss},
                      {"valid_acc", e.valid_acc},
                      {"test_acc", e.test_acc}});
  }
  return {{"run_id", r.run_id},
          {"config", r.config},
          {"initial", {{"valid", stats_json(r.initial_valid)}, {"test_acc", r.initial_test_acc}}},
          {"epochs", std::move(epochs)},
          {"best_epoch", r.best_epoch},
          {"best_valid_acc", r.best_valid_acc},
          {"test_acc", r.test_acc},
          {"checkpoint", r.checkpoint},
          {"status", r.status},
          {"diagnostic", r.diagnostic},
          {"manifest", {{"wall_time_s", r.wall_time_s}}}};
}

RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.run_id = j.at("run_id").get<std::string>();
  r.config = j.at("config");
  r.initial_valid = stats_from_json(j.at("initial").at("valid"));
  r.initial_test_acc = j.at("initial").at("test_acc").get<double>();
  for (const auto& e : j.at("epochs")) {
    EpochRecord rec;
    rec.epoch = e.at("epoch").get<std::size_t>();
    rec.train_loss = e.at("train_loss").get<double>();
    rec.train_adv_loss = e.at("train_adv_loss").get<double>();
    rec.train_acc = e.at("train_acc").get<double>();
    rec.info_nce = e.at("info_nce").get<double>();
    rec.triplet = e.at("triplet").get<double>();
    rec.env_reg = e.at("env_reg").get<double>();
    rec.valid_loss = e.at("valid_loss").get<double>();
    rec.valid_acc = e.at("valid_acc").get<double>();
    rec.test_acc = e.at("test_acc").get<double>();
    r.epochs.push_back(rec);
  }
  r.best_epoch = j.at("best_epoch").get<long>();
  r.best_valid_acc = j.at("best_valid_acc").get<double>();
  r.test_acc = j.at("test_acc").get<double>();
  r.checkpoint = j.at("checkpoint").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.diagnostic = j.at("diagnostic").get<std::string>();
  if (j.contains("manifest")) r.wall_time_s = j["manifest"].value("wall_time_s", 0.0);
  return r;
}

std::string make_run_id(const TrainConfig& c) {
  return to_string(c.method) + "-seed" + std::to_string(c.seed) + "-" + config_hash(c).substr(0, 8);
}

TrainResult train(const synth::DatasetBundle& bundle, const TrainConfig& config_in) {
  if (bundle.train.empty() || bundle.valid.empty() || bundle.test.empty()) {
    throw ContractError("train needs non-empty train, valid and test splits");
  }
  TrainConfig config = config_in;
  config.model.in_dim = bundle.train.front().feature_dim();
  config.model.num_classes = bundle.spec.num_classes;
  config.validate();

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result{RunRecord{}, model::init_model(config.model, mix_keys({config.seed, kInitStream}))};
  RunRecord& rec = result.record;
  rec.run_id = make_run_id(config);
  rec.config = config;

  model::ModelParams params = result.best;
  rec.initial_valid = evaluate(params, config.method, bundle.valid, config.eval_batch);
  rec.initial_test_acc = evaluate(params, config.method, bundle.test, config.eval_batch).accuracy;
  rec.best_valid_acc = rec.initial_valid.accuracy;
  rec.test_acc = rec.initial_test_acc;

  Trainer trainer(params, config);
  try {
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      const auto order = shuffled_order(bundle.train.size(), config.seed, epoch);
      EpochRecord e;
      e.epoch = epoch;
      std::size_t correct = 0, seen = 0, batches = 0;
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        graph::GraphBatch b = graph::batch_subset(bundle.train, std::span(order).subspan(start, end - start));
        StepLosses s = trainer.step(b);
        e.train_loss += s.objective;
        e.train_adv_loss += s.adv;
        e.info_nce += s.info_nce;
        e.triplet += s.triplet;
        e.env_reg += s.env_reg;
        correct += s.correct;
        seen += s.count;
        ++batches;
      }
      const double nb = static_cast<double>(batches);
      e.train_loss /= nb;
      e.train_adv_loss /= nb;
      e.info_nce /= nb;
      e.triplet /= nb;
      e.env_reg /= nb;
      e.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
      const SplitStats valid = evaluate(params, config.method, bundle.valid, config.eval_batch);
      e.valid_loss = valid.loss;
      e.valid_acc = valid.accuracy;
      e.test_acc = evaluate(params, config.method, bundle.test, config.eval_batch).accuracy;
      if (!std::isfinite(e.train_loss) || !std::isfinite(e.valid_loss)) throw NumericError("non-finite epoch loss");
      rec.epochs.push_back(e);
      if (e.valid_acc > rec.best_valid_acc) {
        rec.best_valid_acc = e.valid_acc;
        rec.best_epoch = static_cast<long>(epoch);
        rec.test_acc = e.test_acc;
        result.best = params;
      }
    }
  } catch (const NumericError& err) {
    rec.status = "aborted";
    rec.diagnostic = "epoch " + std::to_string(rec.epochs.size()) + ", step " + std::to_string(trainer.steps_taken()) +
                     ": " + err.what();
  }
  rec.checkpoint = rec.run_id + "/" + (rec.best_epoch < 0 ? std::string("init") : std::to_string(rec.best_epoch)) +
                   ".ckpt.json";
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::filesystem::path write_run(const TrainResult& r, const std::filesystem::path& out_dir) {
  const auto dir = out_dir / r.record.run_id;
  std::filesystem::create_directories(dir);
  auto write = [](const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + path.string());
  };
  write(dir / "record.json", to_json(r.record));
  const std::size_t epoch_label = r.record.best_epoch < 0 ? 0 : static_cast<std::size_t>(r.record.best_epoch);
  write(out_dir / r.record.checkpoint, model::checkpoint_json(r.best, epoch_label));
  return dir;
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

VariantSummary summarize(const std::string& variant, std::span<const double> test_acc) {
  VariantSummary s;
  s.variant = variant;
  s.test_acc.assign(test_acc.begin(), test_acc.end());
  if (test_acc.empty()) return s;
  const double n = static_cast<double>(test_acc.size());
  s.mean = std::accumulate(test_acc.begin(), test_acc.end(), 0.0) / n;
  double sq = 0.0;
  for (double v : test_acc) sq += (v - s.mean) * (v - s.mean);
  s.stddev = test_acc.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  std::vector<double> sorted = s.test_acc;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k = sorted.size();
  s.median = k % 2 == 1 ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
  return s;
}

AblationResult ablate(const synth::DatasetBundle& bundle, const TrainConfig& base, std::span<const std::uint64_t> seeds,
                      std::size_t jobs) {
  if (seeds.empty()) throw ContractError("ablate needs at least one seed");
  constexpr std::size_t kVariants = std::size(kAblationVariants);
  std::vector<std::optional<TrainResult>> slots(kVariants * seeds.size());
  parallel_for(slots.size(), jobs, [&](std::size_t i) {
    TrainConfig c = base;
    c.method = kAblationVariants[i / seeds.size()];
    c.seed = seeds[i % seeds.size()];
    slots[i] = train(bundle, c);
  });
  AblationResult out;
  for (std::size_t v = 0; v < kVariants; ++v) {
    const std::string name = to_string(kAblationVariants[v]);
    std::vector<double> acc;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      TrainResult& r = *slots[v * seeds.size() + s];
      acc.push_back(r.record.test_acc);
      out.runs[name].push_back(std::move(r));
    }
    out.summary.push_back(summarize(name, acc));
  }
  return out;
}

}  // namespace shiftlab::train
