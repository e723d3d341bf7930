// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "shiftlab/errors.hpp"
#include "shiftlab/train/trainer.hpp"
#include "unit/oracles.hpp"

namespace ad = shiftlab::ad;
namespace g = shiftlab::graph;
namespace m = shiftlab::model;
namespace s = shiftlab::synth;
namespace t = shiftlab::train;

namespace {

s::DatasetBundle tiny_bundle(std::size_t train = 48, std::size_t eval = 24) {
  s::ShiftSpec spec;
  spec.train_size = train;
  spec.valid_size = eval;
  spec.test_size = eval;
  spec.scaffold_size = {4, 6};
  return s::generate(spec);
}

t::TrainConfig tiny_config(t::Method method, std::size_t epochs = 2) {
  t::TrainConfig c;
  c.method = method;
  c.epochs = epochs;
  c.batch_size = 16;
  c.model = {5, 3, 2, 8, 1, 8};
  return c;
}

g::GraphBatch first_batch(const s::DatasetBundle& b, std::size_t n = 8) {
  return g::batch(std::span(b.train).subspan(0, n));
}

std::uint64_t group_hash(m::ModelParams& p, std::initializer_list<m::ParamGroup> groups) {
  return m::hash_tensors(m::params_in(p, groups));
}

nlohmann::json without_manifest(const t::RunRecord& r) {
  auto j = t::to_json(r);
  j.erase("manifest");
  return j;
}

double adversarial_value(const m::ModelParams& p, const g::GraphBatch& b, const t::TrainConfig& c, std::size_t step) {
  ad::Tape tape;
  m::ParamBinder bind(tape);
  return t::build_adversarial(bind, p, b, c, t::step_dropout_seed(c, step)).total.value().item();
}

constexpr auto kAll = {m::ParamGroup::kEncoder, m::ParamGroup::kClassifier, m::ParamGroup::kStableGen,
                       m::ParamGroup::kAugmenter};

}  // namespace

TEST(Method, NamesAndFlags) {
  for (auto meth : {t::Method::kMpaiacl, t::Method::kWoCl, t::Method::kWoDis, t::Method::kAiaAblation,
                    t::Method::kErm, t::Method::kDropEdge})
    EXPECT_EQ(t::parse_method(t::to_string(meth)), meth);
  try {
    t::parse_method("gin");
    FAIL();
  } catch (const shiftlab::ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("aia_ablation"), std::string::npos);
  }
  auto flags = [](t::Method meth) {
    t::TrainConfig c;
    c.method = meth;
    return std::pair{c.use_cl(), c.use_dis()};
  };
  EXPECT_EQ(flags(t::Method::kMpaiacl), (std::pair{true, true}));
  EXPECT_EQ(flags(t::Method::kAiaAblation), (std::pair{false, false}));
  EXPECT_EQ(flags(t::Method::kWoCl), (std::pair{false, true}));
  EXPECT_EQ(flags(t::Method::kWoDis), (std::pair{true, false}));
}

TEST(TrainConfig, JsonRoundTripAndFlagResolution) {
  auto c = tiny_config(t::Method::kWoDis);
  c.weights.gamma = 0.25;
  nlohmann::json j = c;
  EXPECT_EQ(j.at("use_cl"), true);
  EXPECT_EQ(j.at("use_dis"), false);
  EXPECT_EQ(j.get<t::TrainConfig>(), c);

  const auto variant = nlohmann::json{{"method", "mpaiacl"}, {"use_cl", false}}.get<t::TrainConfig>();
  EXPECT_EQ(variant.method, t::Method::kWoCl);
  EXPECT_THROW((nlohmann::json{{"method", "wo_cl"}, {"use_cl", true}}.get<t::TrainConfig>()), shiftlab::ContractError);
  EXPECT_THROW((nlohmann::json{{"learning_rate", 1}}.get<t::TrainConfig>()), shiftlab::ContractError);
  EXPECT_NE(t::config_hash(c), t::config_hash(tiny_config(t::Method::kMpaiacl)));
  EXPECT_EQ(t::config_hash(c).size(), 16u);
}

TEST(Optim, AdamFirstStepAndClip) {
  ad::Tensor w = ad::Tensor::vector({1.0, -2.0});
  t::Adam opt({&w}, {});
  opt.step({ad::Tensor::vector({0.5, -4.0})});
  // The first bias-corrected Adam step moves each weight by lr * g / (|g| + eps).
  EXPECT_NEAR(w[0], 1.0 - 1e-3 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(w[1], -2.0 + 1e-3 * 4.0 / (4.0 + 1e-8), 1e-15);
  std::vector<ad::Tensor> grads{ad::Tensor::vector({3.0}), ad::Tensor::vector({4.0})};
  EXPECT_EQ(t::clip_global_norm(grads, 1.0), 5.0);
  EXPECT_NEAR(grads[0][0], 0.6, 1e-15);
  EXPECT_NEAR(grads[1][0], 0.8, 1e-15);
  std::vector<ad::Tensor> bad{ad::Tensor::vector({NAN})};
  EXPECT_THROW(t::clip_global_norm(bad, 1.0), shiftlab::NumericError);
}

TEST(Step, AugmenterPhaseMovesOnlyAugmenter) {
  const auto bundle = tiny_bundle();
  auto p = m::init_model(tiny_config(t::Method::kMpaiacl).model, 1);
  t::Trainer trainer(p, tiny_config(t::Method::kMpaiacl));
  const auto b = first_batch(bundle);
  const auto others = {m::ParamGroup::kEncoder, m::ParamGroup::kClassifier, m::ParamGroup::kStableGen};
  const auto before_others = group_hash(p, others);
  const auto before_aug = group_hash(p, {m::ParamGroup::kAugmenter});
  t::StepLosses out;
  trainer.augmenter_step(b, out);
  EXPECT_EQ(group_hash(p, others), before_others);
  EXPECT_NE(group_hash(p, {m::ParamGroup::kAugmenter}), before_aug);
}

TEST(Step, StablePhaseNeverMovesAugmenter) {
  const auto bundle = tiny_bundle();
  for (auto meth : t::kAblationVariants) {
    auto p = m::init_model(tiny_config(meth).model, 2);
    t::Trainer trainer(p, tiny_config(meth));
    const auto b = first_batch(bundle);
    const auto before_aug = group_hash(p, {m::ParamGroup::kAugmenter});
    const auto before_main = group_hash(p, {m::ParamGroup::kEncoder, m::ParamGroup::kClassifier});
    t::StepLosses out;
    trainer.stable_step(b, out);
    EXPECT_EQ(group_hash(p, {m::ParamGroup::kAugmenter}), before_aug);
    EXPECT_NE(group_hash(p, {m::ParamGroup::kEncoder, m::ParamGroup::kClassifier}), before_main);
  }
}

TEST(Step, BaselinesTouchOnlyEncoderAndClassifier) {
  const auto bundle = tiny_bundle();
  for (auto meth : {t::Method::kErm, t::Method::kDropEdge}) {
    auto p = m::init_model(tiny_config(meth).model, 3);
    t::Trainer trainer(p, tiny_config(meth));
    const auto masks = {m::ParamGroup::kStableGen, m::ParamGroup::kAugmenter};
    const auto before = group_hash(p, masks);
    trainer.step(first_batch(bundle));
    EXPECT_EQ(group_hash(p, masks), before);
    t::StepLosses out;
    EXPECT_THROW(trainer.augmenter_step(first_batch(bundle), out), shiftlab::ContractError);
  }
}

TEST(Step, StableObjectiveHasNoAugmenterGradientUnderPartition) {
  const auto bundle = tiny_bundle();
  auto p = m::init_model(tiny_config(t::Method::kMpaiacl).model, 4);
  const auto b = first_batch(bundle);
  for (auto meth : t::kAblationVariants) {
    const t::Trainer trainer(p, tiny_config(meth));
    const std::set<ad::Tensor*> stable(trainer.stable_params().begin(), trainer.stable_params().end());
    for (auto* tensor : trainer.augmenter_params()) EXPECT_FALSE(stable.contains(tensor));
    EXPECT_EQ(trainer.augmenter_params().size() + trainer.stable_params().size(), m::params_in(p, kAll).size());

    ad::Tape tape;
    m::ParamBinder bind(tape);
    bind.track(trainer.stable_params());
    const auto terms = t::build_stable(bind, p, b, tiny_config(meth));
    const auto grads = tape.backward(terms.total);
    double moved = 0.0;
    for (auto* tensor : trainer.stable_params()) {
      const ad::Tensor g = bind.grad(grads, *tensor);
      for (double v : g.storage()) moved += std::abs(v);
    }
    EXPECT_GT(moved, 0.0);
    for (auto* tensor : trainer.augmenter_params()) {
      const ad::Tensor g = bind.grad(grads, *tensor);
      for (double v : g.storage()) EXPECT_EQ(v, 0.0);
    }
  }
}

TEST(Step, RegularizersOfAdversarialObjectiveIgnoreClassifier) {
  const auto bundle = tiny_bundle();
  auto p = m::init_model(tiny_config(t::Method::kMpaiacl).model, 5);
  const auto b = first_batch(bundle);
  const auto c = tiny_config(t::Method::kMpaiacl);
  for (int term = 0; term < 2; ++term) {
    ad::Tape tape;
    m::ParamBinder bind(tape);
    bind.track(m::params_in(p, kAll));
    const auto terms = t::build_adversarial(bind, p, b, c, 17);
    const auto grads = tape.backward(term == 0 ? terms.triplet : terms.env_reg);
    for (auto* tensor : m::params_in(p, {m::ParamGroup::kClassifier})) {
      const ad::Tensor g = bind.grad(grads, *tensor);
      for (double v : g.storage()) EXPECT_EQ(v, 0.0);
    }
  }
}

TEST(Step, SingleAscentStepIncreasesAdversarialObjective) {
  const auto bundle = tiny_bundle();
  for (auto meth : t::kAblationVariants) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto c = tiny_config(meth);
      c.seed = seed;
      auto p = m::init_model(c.model, seed + 10);
      const auto b = first_batch(bundle);
      const double before = adversarial_value(p, b, c, 0);
      t::Trainer trainer(p, c);
      t::StepLosses out;
      trainer.augmenter_step(b, out);
      EXPECT_EQ(out.adv, before);
      EXPECT_GT(adversarial_value(p, b, c, 0), before - 1e-9);
      EXPECT_GT(adversarial_value(p, b, c, 0), before);
    }
  }
}

TEST(Step, DegenerateWeightsReduceToStableRegularizer) {
  const auto bundle = tiny_bundle();
  auto c = tiny_config(t::Method::kMpaiacl);
  c.weights.lambda = 0.0;
  c.weights.alpha_adv = 0.0;
  c.weights.gamma = 0.0;
  auto p = m::init_model(c.model, 6);
  ad::Tape tape;
  m::ParamBinder bind(tape);
  const auto st = t::build_stable(bind, p, first_batch(bundle), c);
  EXPECT_EQ(st.total.value().item(), st.stable_reg.value().item());
  ad::Tape tape2;
  m::ParamBinder bind2(tape2);
  const auto adv = t::build_adversarial(bind2, p, first_batch(bundle), c, 3);
  EXPECT_EQ(adv.total.value().item(), adv.sup_da.value().item());
}

TEST(Step, WithoutClLogsNoInfoNce) {
  const auto bundle = tiny_bundle();
  const auto r = t::train(bundle, tiny_config(t::Method::kWoCl, 1));
  for (const auto& e : r.record.epochs) EXPECT_EQ(e.info_nce, 0.0);
  const auto a = t::train(bundle, tiny_config(t::Method::kWoDis, 1));
  for (const auto& e : a.record.epochs) EXPECT_EQ(e.triplet, 0.0);
}

TEST(Train, ZeroEpochsEvaluatesInitialParameters) {
  const auto bundle = tiny_bundle();
  const auto r = t::train(bundle, tiny_config(t::Method::kMpaiacl, 0));
  EXPECT_TRUE(r.record.epochs.empty());
  EXPECT_EQ(r.record.best_epoch, -1);
  EXPECT_EQ(r.record.test_acc, r.record.initial_test_acc);
  EXPECT_EQ(r.record.status, "ok");
}

TEST(Train, EpochsContiguousAndBestSelection) {
  const auto bundle = tiny_bundle();
  const auto r = t::train(bundle, tiny_config(t::Method::kErm, 4));
  ASSERT_EQ(r.record.epochs.size(), 4u);
  double best = r.record.initial_valid.accuracy;
  long best_epoch = -1;
  double test = r.record.initial_test_acc;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(r.record.epochs[i].epoch, i);
    if (r.record.epochs[i].valid_acc > best) {
      best = r.record.epochs[i].valid_acc;
      best_epoch = static_cast<long>(i);
      test = r.record.epochs[i].test_acc;
    }
  }
  EXPECT_EQ(r.record.best_epoch, best_epoch);
  EXPECT_EQ(r.record.test_acc, test);
  EXPECT_EQ(t::evaluate(r.best, t::Method::kErm, bundle.test).accuracy, test);
}

TEST(Train, DeterministicRecords) {
  const auto bundle = tiny_bundle();
  for (auto meth : {t::Method::kMpaiacl, t::Method::kDropEdge}) {
    const auto a = t::train(bundle, tiny_config(meth));
    const auto b = t::train(bundle, tiny_config(meth));
    EXPECT_EQ(without_manifest(a.record).dump(), without_manifest(b.record).dump());
  }
}

TEST(Train, DropEdgeWithZeroRateMatchesErm) {
  const auto bundle = tiny_bundle();
  auto de = tiny_config(t::Method::kDropEdge, 3);
  de.dropedge_p = 0.0;
  const auto a = t::train(bundle, de);
  const auto b = t::train(bundle, tiny_config(t::Method::kErm, 3));
  EXPECT_EQ(a.record.epochs, b.record.epochs);
  auto pa = a.best, pb = b.best;
  EXPECT_EQ(group_hash(pa, kAll), group_hash(pb, kAll));
}

TEST(Train, DropEdgeMaskIsDeterministicAndBinary) {
  const auto a = t::dropedge_mask(200, 0.3, 1, 5);
  EXPECT_EQ(a, t::dropedge_mask(200, 0.3, 1, 5));
  EXPECT_NE(a, t::dropedge_mask(200, 0.3, 1, 6));
  std::size_t kept = 0;
  for (double v : a.storage()) {
    EXPECT_TRUE(v == 0.0 || v == 1.0);
    kept += v == 1.0;
  }
  EXPECT_GT(kept, 100u);
  EXPECT_LT(kept, 180u);
}

TEST(Train, NumericBlowUpAbortsWithDiagnostic) {
  const auto bundle = tiny_bundle();
  auto c = tiny_config(t::Method::kErm, 3);
  c.adam.lr = 1e300;
  c.grad_clip = 1e300;
  const auto r = t::train(bundle, c);
  EXPECT_EQ(r.record.status, "aborted");
  EXPECT_FALSE(r.record.diagnostic.empty());
}

TEST(Train, RecordJsonRoundTripAndFinite) {
  const auto bundle = tiny_bundle();
  const auto r = t::train(bundle, tiny_config(t::Method::kMpaiacl, 2));
  const auto j = t::to_json(r.record);
  for (const auto& e : j.at("epochs"))
    for (const auto& [k, v] : e.items())
      if (v.is_number()) EXPECT_TRUE(std::isfinite(v.get<double>())) << k;
  EXPECT_EQ(t::to_json(t::record_from_json(j)), j);
  EXPECT_TRUE(j.at("manifest").contains("wall_time_s"));
}

TEST(Train, WriteRunLayout) {
  const auto dir = std::filesystem::temp_directory_path() / "shiftlab_trainer_write";
  std::filesystem::remove_all(dir);
  const auto bundle = tiny_bundle();
  const auto r = t::train(bundle, tiny_config(t::Method::kErm, 1));
  const auto run = t::write_run(r, dir);
  EXPECT_EQ(run, dir / r.record.run_id);
  EXPECT_TRUE(std::filesystem::exists(run / "record.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / r.record.checkpoint));
}

TEST(Ablate, FourVariantsAndSummaryMatchesRecords) {
  const auto bundle = tiny_bundle(32, 16);
  const std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  const auto res = t::ablate(bundle, tiny_config(t::Method::kMpaiacl, 1), seeds, 2);
  ASSERT_EQ(res.summary.size(), 4u);
  ASSERT_EQ(res.runs.size(), 4u);
  for (const auto& sm : res.summary) {
    const auto& runs = res.runs.at(sm.variant);
    ASSERT_EQ(runs.size(), seeds.size());
    std::vector<double> acc;
    for (const auto& r : runs) acc.push_back(r.record.test_acc);
    double mean = 0;
    for (double a : acc) mean += a;
    mean /= static_cast<double>(acc.size());
    double var = 0;
    for (double a : acc) var += (a - mean) * (a - mean);
    auto sorted = acc;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sm.test_acc, acc);
    EXPECT_NEAR(sm.mean, mean, 1e-12);
    EXPECT_NEAR(sm.stddev, std::sqrt(var / 4.0), 1e-12);
    EXPECT_EQ(sm.median, sorted[2]);
  }
  // Threaded and sequential execution agree.
  const auto seq = t::ablate(bundle, tiny_config(t::Method::kMpaiacl, 1), seeds, 1);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(seq.summary[i].test_acc, res.summary[i].test_acc);
}

TEST(Train, ErmSolvesIidBundle) {
  s::ShiftSpec spec;
  spec.mode = s::ShiftMode::kIid;
  spec.valid_pool = spec.train_pool;
  spec.test_pool = spec.train_pool;
  t::TrainConfig c;
  c.method = t::Method::kErm;
  c.epochs = 50;
  const auto r = t::train(s::generate(spec), c);
  EXPECT_GE(r.record.test_acc, 0.95);
}
