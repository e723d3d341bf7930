// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shiftlab/train/trainer.hpp"

namespace shiftlab::eval {

/// Stable and environment-view embeddings of a set of graphs plus the stable
/// node masks, one slice per graph.
struct ViewEmbeddings {
  ad::Tensor h_s;  // B x H
  ad::Tensor h_e;  // B x H
  std::vector<std::vector<double>> stable_node_masks;
};

/// h_s encodes the stable view M_s, h_e the perturbed environment view
/// (1 - M_s) * M_adv, exactly as during training.
ViewEmbeddings embed_views(const model::ModelParams& p, std::span<const graph::Graph> graphs,
                           std::size_t eval_batch = 256);

struct PredictionRow {
  std::size_t graph_id = 0;
  std::string env;
  std::size_t label = 0;
  std::size_t predicted = 0;
  std::vector<double> probs;
};

std::vector<PredictionRow> predictions(const model::ModelParams& p, train::Method m, std::span<const graph::Graph> graphs,
                                       std::size_t eval_batch = 256);

struct ProjectionPoint {
  double x = 0.0;
  double y = 0.0;
  std::string type;  // "stable" or "environment"
  std::size_t graph_id = 0;
};

struct MetricsReport {
  double test_accuracy = 0.0;
  std::map<std::string, double> per_env_accuracy;
  double worst_env_loss = 0.0;
  double mean_env_loss = 0.0;
  std::optional<double> roc_auc;
  double gcs_train_test = 0.0;
  std::optional<double> separation_ratio;
  std::optional<double> mask_iou_stable;
  std::optional<double> mask_iou_random;
  std::vector<ProjectionPoint> projection_points;
};

/// Full report on the test split. Mask and latent metrics exist only for the
/// adversarial methods, ROC-AUC only for two classes.
MetricsReport build_report(const model::ModelParams& p, train::Method m, const synth::DatasetBundle& bundle,
                           std::size_t eval_batch = 256);

nlohmann::json to_json(const MetricsReport& r);

/// Mean IoU of thresholded stable node masks against the planted motif nodes,
/// and the analytic expectation for uniform random masks on the same graphs.
std::pair<double, double> mask_iou_stable(const synth::ShiftSpec& spec, std::span<const graph::Graph> graphs,
                                          const std::vector<std::vector<double>>& node_masks);

}  // namespace shiftlab::eval
