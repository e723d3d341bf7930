// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/eval/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>

#include "shiftlab/errors.hpp"

namespace shiftlab::eval {
namespace {

double row_distance(const ad::Tensor& a, std::size_t i, const ad::Tensor& b, std::size_t j) {
  double sq = 0.0;
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double d = a.at(i, k) - b.at(j, k);
    sq += d * d;
  }
  return std::sqrt(sq);
}

// log C(n, k)
double log_choose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

EnvRisk worst_env_risk(const std::map<std::string, std::vector<double>>& losses_by_env) {
  EnvRisk r;
  r.worst = -std::numeric_limits<double>::infinity();
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& [env, losses] : losses_by_env) {
    if (losses.empty()) {
      std::cerr << "warning: environment '" << env << "' has no graphs; skipped\n";
      continue;
    }
    const double sum = std::accumulate(losses.begin(), losses.end(), 0.0);
    const double mean = sum / static_cast<double>(losses.size());
    r.per_env[env] = mean;
    r.worst = std::max(r.worst, mean);
    total += sum;
    count += losses.size();
  }
  if (count == 0) throw ContractError("worst_env_risk needs at least one non-empty environment");
  r.mean = total / static_cast<double>(count);
  return r;
}

EnvRisk worst_env_risk(std::span<const double> losses, std::span<const std::string> envs) {
  if (losses.size() != envs.size()) throw DimensionError("worst_env_risk: loss and env counts differ");
  std::map<std::string, std::vector<double>> groups;
  for (std::size_t i = 0; i < losses.size(); ++i) groups[envs[i]].push_back(losses[i]);
  return worst_env_risk(groups);
}

double separation_ratio(const ad::Tensor& h_s, const ad::Tensor& h_e) {
  if (h_s.shape() != h_e.shape() || h_s.rank() != 2) throw DimensionError("separation_ratio: shapes differ");
  const std::size_t n = h_s.rows();
  if (n < 2) throw ContractError("separation_ratio needs at least two rows");
  double cross = 0.0;
  for (std::size_t i = 0; i < n; ++i) cross += row_distance(h_s, i, h_e, i);
  cross /= static_cast<double>(n);
  double within = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) within += row_distance(h_s, i, h_s, j);
  within /= static_cast<double>(n * (n - 1) / 2);
  if (within == 0.0) return std::numeric_limits<double>::infinity();
  return cross / within;
}

double mask_iou(std::span<const double> node_mask, std::span<const std::size_t> truth) {
  std::set<std::size_t> truth_set(truth.begin(), truth.end());
  for (std::size_t t : truth_set)
    if (t >= node_mask.size()) throw IndexError("mask_iou: ground-truth node outside the graph");
  std::size_t inter = 0, uni = truth_set.size();
  for (std::size_t i = 0; i < node_mask.size(); ++i) {
    if (node_mask[i] < kMaskThreshold) continue;
    if (truth_set.contains(i)) ++inter;
    else ++uni;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double random_mask_iou(std::size_t motif, std::size_t n) {
  if (motif == 0 || motif > n) throw ContractError("random_mask_iou needs 1 <= motif <= n");
  // IoU = a / (motif + b) with a ~ Bin(motif, 1/2) selected motif nodes and
  // b ~ Bin(n - motif, 1/2) selected others; E[a] = motif / 2 and a, b independent.
  const std::size_t rest = n - motif;
  double expect_inv = 0.0;
  for (std::size_t b = 0; b <= rest; ++b) {
    const double p = std::exp(log_choose(rest, b) - static_cast<double>(rest) * std::log(2.0));
    expect_inv += p / static_cast<double>(motif + b);
  }
  return 0.5 * static_cast<double>(motif) * expect_inv;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("roc_auc: score and label counts differ");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) {
        rank_sum += avg_rank;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) throw ContractError("roc_auc needs both classes present");
  const double np = static_cast<double>(pos), nn = static_cast<double>(neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

Projection project_2d(const ad::Tensor& points) {
  if (points.rank() != 2) throw DimensionError("project_2d expects a matrix");
  const std::size_t n = points.rows(), d = points.cols();
  if (n < 3) throw ContractError("project_2d needs at least three points");
  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x(i, j) = points.at(i, j);
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);

  Projection out;
  out.coords = ad::Tensor({n, 2}, 0.0);
  out.variances = {0.0, 0.0};
  out.total_variance = cov.trace();
  const double tol = 1e-12 * std::max(1.0, out.total_variance);
  for (std::size_t axis = 0; axis < 2 && axis < d; ++axis) {
    const Eigen::Index k = static_cast<Eigen::Index>(d - 1 - axis);  // eigenvalues ascend
    const double lambda = eig.eigenvalues()(k);
    if (lambda <= tol) continue;
    Eigen::VectorXd v = eig.eigenvectors().col(k);
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    if (v(big) < 0.0) v = -v;
    const Eigen::VectorXd proj = x * v;
    for (std::size_t i = 0; i < n; ++i) out.coords.at(i, axis) = proj(static_cast<Eigen::Index>(i));
    out.variances[axis] = lambda;
  }
  return out;
}

}  // namespace shiftlab::eval
