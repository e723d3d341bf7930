// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/eval/report.hpp"

#include <algorithm>
#include <cmath>

#include "shiftlab/errors.hpp"
#include "shiftlab/eval/metrics.hpp"

namespace shiftlab::eval {
namespace {

void append_rows(ad::Tensor& dst, std::size_t& row, const ad::Tensor& src) {
  std::copy(src.storage().begin(), src.storage().end(), dst.storage().begin() + static_cast<long>(row * dst.cols()));
  row += src.rows();
}

}  // namespace

ViewEmbeddings embed_views(const model::ModelParams& p, std::span<const graph::Graph> graphs, std::size_t eval_batch) {
  const std::size_t width = p.config.width;
  ViewEmbeddings out{ad::Tensor({graphs.size(), width}), ad::Tensor({graphs.size(), width}), {}};
  std::size_t row = 0;
  for (std::size_t start = 0; start < graphs.size(); start += eval_batch) {
    const std::size_t end = std::min(graphs.size(), start + eval_batch);
    graph::GraphBatch b = graph::batch(graphs.subspan(start, end - start));
    ad::Tape tape;
    model::ParamBinder bind(tape);
    graph::MaskVars stable = model::gen_masks(bind, p.stable_gen, b);
    graph::MaskVars env = model::env_masks_from_stable(stable);
    graph::MaskVars adv = model::gen_masks(bind, p.augmenter, b);
    graph::MaskVars env_pert{ad::mul(env.node, adv.node), ad::mul(env.edge, adv.edge)};
    const ad::Tensor h_s = model::encode(bind, p.encoder, graph::MaskedView::masked(b, stable)).value();
    const ad::Tensor h_e = model::encode(bind, p.encoder, graph::MaskedView::masked(b, env_pert)).value();
    std::size_t r2 = row;
    append_rows(out.h_s, row, h_s);
    append_rows(out.h_e, r2, h_e);
    const ad::Tensor& nm = stable.node.value();
    for (std::size_t g = 0; g < b.num_graphs(); ++g) {
      out.stable_node_masks.emplace_back(nm.storage().begin() + static_cast<long>(b.node_offset[g]),
                                         nm.storage().begin() + static_cast<long>(b.node_offset[g + 1]));
    }
  }
  return out;
}

std::vector<PredictionRow> predictions(const model::ModelParams& p, train::Method m, std::span<const graph::Graph> graphs,
                                       std::size_t eval_batch) {
  std::vector<PredictionRow> rows;
  rows.reserve(graphs.size());
  for (std::size_t start = 0; start < graphs.size(); start += eval_batch) {
    const std::size_t end = std::min(graphs.size(), start + eval_batch);
    graph::GraphBatch b = graph::batch(graphs.subspan(start, end - start));
    const ad::Tensor probs = train::predict(p, m, b);
    for (std::size_t i = 0; i < b.num_graphs(); ++i) {
      PredictionRow r;
      r.graph_id = start + i;
      r.env = b.envs[i];
      r.label = b.labels[i];
      for (std::size_t k = 0; k < probs.cols(); ++k) r.probs.push_back(probs.at(i, k));
      r.predicted = static_cast<std::size_t>(std::max_element(r.probs.begin(), r.probs.end()) - r.probs.begin());
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::pair<double, double> mask_iou_stable(const synth::ShiftSpec& spec, std::span<const graph::Graph> graphs,
                                          const std::vector<std::vector<double>>& node_masks) {
  if (graphs.size() != node_masks.size()) throw DimensionError("mask_iou_stable: one mask per graph required");
  if (graphs.empty()) throw ContractError("mask_iou_stable: no graphs");
  double iou = 0.0, random = 0.0;
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    const auto truth = synth::motif_nodes(spec, graphs[g]);
    iou += mask_iou(node_masks[g], truth);
    random += random_mask_iou(truth.size(), graphs[g].n);
  }
  const double n = static_cast<double>(graphs.size());
  return {iou / n, random / n};
}

MetricsReport build_report(const model::ModelParams& p, train::Method m, const synth::DatasetBundle& bundle,
                           std::size_t eval_batch) {
  MetricsReport r;
  const auto& test = bundle.test;
  if (test.empty()) throw ContractError("build_report: empty test split");
  const auto rows = predictions(p, m, test, eval_batch);

  std::vector<double> losses;
  std::vector<std::string> envs;
  std::map<std::string, std::pair<std::size_t, std::size_t>> env_hits;
  std::size_t correct = 0;
  for (const auto& row : rows) {
    losses.push_back(-std::log(std::max(row.probs[row.label], ad::kLogFloor)));
    envs.push_back(row.env);
    const bool hit = row.predicted == row.label;
    correct += hit;
    auto& [h, c] = env_hits[row.env];
    h += hit;
    ++c;
  }
  r.test_accuracy = static_cast<double>(correct) / static_cast<double>(rows.size());
  for (const auto& [env, hc] : env_hits) r.per_env_accuracy[env] = static_cast<double>(hc.first) / static_cast<double>(hc.second);
  const EnvRisk risk = worst_env_risk(losses, envs);
  r.worst_env_loss = risk.worst;
  r.mean_env_loss = risk.mean;

  if (bundle.spec.num_classes == 2) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& row : rows) {
      scores.push_back(row.probs[1]);
      labels.push_back(row.label == 1 ? 1 : 0);
    }
    if (std::count(labels.begin(), labels.end(), 1) > 0 && std::count(labels.begin(), labels.end(), 0) > 0) {
      r.roc_auc = roc_auc(scores, labels);
    }
  }
  r.gcs_train_test = synth::gcs(bundle.p_train, bundle.p_test);

  if (train::is_adversarial(m)) {
    const ViewEmbeddings views = embed_views(p, test, eval_batch);
    if (test.size() >= 2) r.separation_ratio = separation_ratio(views.h_s, views.h_e);
    const auto [iou, random] = mask_iou_stable(bundle.spec, test, views.stable_node_masks);
    r.mask_iou_stable = iou;
    r.mask_iou_random = random;

    const std::size_t n = test.size(), h = views.h_s.cols();
    ad::Tensor both({2 * n, h});
    std::copy(views.h_s.storage().begin(), views.h_s.storage().end(), both.storage().begin());
    std::copy(views.h_e.storage().begin(), views.h_e.storage().end(), both.storage().begin() + static_cast<long>(n * h));
    if (2 * n >= 3) {
      const Projection proj = project_2d(both);
      for (std::size_t i = 0; i < 2 * n; ++i) {
        r.projection_points.push_back(
            {proj.coords.at(i, 0), proj.coords.at(i, 1), i < n ? "stable" : "environment", i % n});
      }
    }
  }
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j = {{"test_accuracy", r.test_accuracy},
                      {"per_env_accuracy", r.per_env_accuracy},
                      {"worst_env_loss", r.worst_env_loss},
                      {"mean_env_loss", r.mean_env_loss},
                      {"gcs_train_test", r.gcs_train_test}};
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json("inf");
  };
  put("roc_auc", r.roc_auc);
  put("separation_ratio", r.separation_ratio);
  put("mask_iou_stable", r.mask_iou_stable);
  put("mask_iou_random", r.mask_iou_random);
  j["projection_points"] = r.projection_points.size();
  return j;
}

}  // namespace shiftlab::eval
