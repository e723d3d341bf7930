// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shiftlab/model/gnn.hpp"
#include "shiftlab/objectives/losses.hpp"
#include "shiftlab/synth/generator.hpp"
#include "shiftlab/train/optim.hpp"

namespace shiftlab::train {

/// kMpaiacl = contrastive + triplet, kWoCl = triplet only, kWoDis = contrastive
/// only, kAiaAblation = neither. kErm and kDropEdge train encoder + classifier on
/// the raw (or edge-dropped) graph.
enum class Method { kMpaiacl, kWoCl, kWoDis, kAiaAblation, kErm, kDropEdge };

std::string to_string(Method m);
/// Throws ContractError listing the valid names.
Method parse_method(const std::string& s);
bool is_adversarial(Method m);

struct TrainConfig {
  Method method = Method::kMpaiacl;
  obj::LossWeights weights;
  AdamSettings adam;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double dropedge_p = 0.2;
  double dropout_rate = 0.2;
  double grad_clip = 5.0;
  std::size_t eval_batch = 256;
  model::ModelConfig model;

  bool use_cl() const { return method == Method::kMpaiacl || method == Method::kWoDis; }
  bool use_dis() const { return method == Method::kMpaiacl || method == Method::kWoCl; }
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Serializes method plus the derived use_cl / use_dis flags.
void to_json(nlohmann::json& j, const TrainConfig& c);
/// Unknown keys are rejected. Explicit use_cl / use_dis must agree with an
/// adversarial method, or select the variant when the method is "mpaiacl".
void from_json(const nlohmann::json& j, TrainConfig& c);

/// FNV-1a of the canonical JSON of the config, as 16 hex digits.
std::string config_hash(const TrainConfig& c);

/// Scalars of one training step; unused terms stay 0.
struct StepLosses {
  double adv = 0.0;
  double sup_da = 0.0;
  double triplet = 0.0;
  double env_reg = 0.0;
  double objective = 0.0;  // L_std for adversarial methods, cross-entropy otherwise
  double stable_reg = 0.0;
  double info_nce = 0.0;
  std::size_t correct = 0;
  std::size_t count = 0;
};

struct AdversarialTerms {
  ad::Var total;
  ad::Var sup_da;
  ad::Var triplet;
  ad::Var env_reg;
};

struct StableTerms {
  ad::Var total;
  ad::Var stable_reg;
  ad::Var info_nce;
  ad::Var pred_std;
};

/// Builds L_adv on the binder's tape. Parameters are bound through `bind`, so the
/// caller decides which of them are tracked.
AdversarialTerms build_adversarial(model::ParamBinder& bind, const model::ModelParams& p, const graph::GraphBatch& b,
                                   const TrainConfig& c, std::uint64_t dropout_seed);
/// Builds L_std on the binder's tape.
StableTerms build_stable(model::ParamBinder& bind, const model::ModelParams& p, const graph::GraphBatch& b,
                         const TrainConfig& c);

/// Dropout seed of h_o' at a given global step of a run.
std::uint64_t step_dropout_seed(const TrainConfig& c, std::size_t step);

/// Edge keep-mask of the DropEdge baseline for one step.
ad::Tensor dropedge_mask(std::size_t num_edges, double p, std::uint64_t seed, std::uint64_t step);

/// Owns the optimizer state of one run and applies single steps.
class Trainer {
 public:
  Trainer(model::ModelParams& params, const TrainConfig& config);

  /// Adversarial methods: Phase A ascends L_adv over the augmenter only, Phase B
  /// descends L_std over stable generator, encoder and classifier. Baselines do
  /// one cross-entropy step over encoder and classifier.
  StepLosses step(const graph::GraphBatch& b);

  /// Phase A alone: one ascent step on L_adv over the augmenter. Does not
  /// advance the step counter.
  void augmenter_step(const graph::GraphBatch& b, StepLosses& out);
  /// Phase B alone: one descent step on L_std over stable generator, encoder
  /// and classifier. Does not advance the step counter.
  void stable_step(const graph::GraphBatch& b, StepLosses& out);

  /// Tensors Phase A updates (augmenter) and tensors the stable or supervised
  /// step updates. The two lists are disjoint.
  const std::vector<ad::Tensor*>& augmenter_params() const { return aug_params_; }
  const std::vector<ad::Tensor*>& stable_params() const { return main_params_; }

  std::size_t steps_taken() const { return step_; }
  const TrainConfig& config() const { return config_; }

 private:
  StepLosses adversarial_step(const graph::GraphBatch& b);
  StepLosses supervised_step(const graph::GraphBatch& b);

  model::ModelParams& params_;
  TrainConfig config_;
  std::vector<ad::Tensor*> aug_params_;
  std::vector<ad::Tensor*> main_params_;
  std::optional<Adam> aug_opt_;
  Adam main_opt_;
  std::size_t step_ = 0;
};

/// Class probabilities the method predicts with: the stable view for adversarial
/// methods, the raw graph otherwise. [B x C]
ad::Tensor predict(const model::ModelParams& p, Method m, const graph::GraphBatch& b);

struct SplitStats {
  double loss = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

SplitStats evaluate(const model::ModelParams& p, Method m, std::span<const graph::Graph> graphs,
                    std::size_t eval_batch = 256);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_adv_loss = 0.0;
  double train_acc = 0.0;
  double info_nce = 0.0;
  double triplet = 0.0;
  double env_reg = 0.0;
  double valid_loss = 0.0;
  double valid_acc = 0.0;
  double test_acc = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct RunRecord {
  std::string run_id;
  nlohmann::json config;
  SplitStats initial_valid;
  double initial_test_acc = 0.0;
  std::vector<EpochRecord> epochs;
  /// -1 when the initial parameters were never beaten on validation.
  long best_epoch = -1;
  double best_valid_acc = 0.0;
  double test_acc = 0.0;
  std::string checkpoint;
  std::string status = "ok";
  std::string diagnostic;
  double wall_time_s = 0.0;
};

/// Wall time goes under "manifest", the only field that varies between
/// identical runs.
nlohmann::json to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);

struct TrainResult {
  RunRecord record;
  model::ModelParams best;
};

std::string make_run_id(const TrainConfig& c);

/// Trains for config.epochs and keeps the parameters with the best validation
/// accuracy. A non-finite value aborts the run with status "aborted".
TrainResult train(const synth::DatasetBundle& bundle, const TrainConfig& config);

/// Writes {out_dir}/{run_id}/record.json and the best checkpoint.
std::filesystem::path write_run(const TrainResult& r, const std::filesystem::path& out_dir);

/// Runs fn(0..n-1) on at most `jobs` threads.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

struct VariantSummary {
  std::string variant;
  std::vector<double> test_acc;  // per seed
  double mean = 0.0;
  double stddev = 0.0;
  double median = 0.0;
};

struct AblationResult {
  std::map<std::string, std::vector<TrainResult>> runs;
  std::vector<VariantSummary> summary;  // mpaiacl, wo_cl, wo_dis, aia_ablation
};

inline constexpr Method kAblationVariants[] = {Method::kMpaiacl, Method::kWoCl, Method::kWoDis, Method::kAiaAblation};

VariantSummary summarize(const std::string& variant, std::span<const double> test_acc);

AblationResult ablate(const synth::DatasetBundle& bundle, const TrainConfig& base,
                      std::span<const std::uint64_t> seeds, std::size_t jobs = 1);

}  // namespace shiftlab::train
