// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "shiftlab/autodiff/tensor.hpp"

namespace shiftlab::eval {

struct EnvRisk {
  double worst = 0.0;
  double mean = 0.0;  // over all graphs of non-empty groups
  std::map<std::string, double> per_env;
};

/// Max over environment groups of the mean loss. Empty groups are skipped with
/// a warning on stderr; at least one group must be non-empty.
EnvRisk worst_env_risk(const std::map<std::string, std::vector<double>>& losses_by_env);
/// Groups per-graph losses by their environment tag first.
EnvRisk worst_env_risk(std::span<const double> losses, std::span<const std::string> envs);

/// mean_i |h_s_i - h_e_i| / mean_{i<j} |h_s_i - h_s_j|. +inf when the
/// denominator is zero.
double separation_ratio(const ad::Tensor& h_s, const ad::Tensor& h_e);

/// Nodes with mask >= 0.5 count as selected.
inline constexpr double kMaskThreshold = 0.5;

/// IoU of the thresholded mask of one graph against its planted node set.
double mask_iou(std::span<const double> node_mask, std::span<const std::size_t> truth);

/// Expected IoU of a mask with i.i.d. uniform entries against `motif` of `n`
/// nodes: every node is selected independently with probability 1/2.
double random_mask_iou(std::size_t motif, std::size_t n);

/// Mann-Whitney AUC with ties counted half. Throws ContractError when only one
/// class is present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct Projection {
  ad::Tensor coords;              // n x 2
  std::vector<double> variances;  // variance captured by each of the two axes
  double total_variance = 0.0;
};

/// Top-2 principal components. Each axis is signed so its largest-magnitude
/// loading is positive; missing components are zero.
Projection project_2d(const ad::Tensor& points);

}  // namespace shiftlab::eval
