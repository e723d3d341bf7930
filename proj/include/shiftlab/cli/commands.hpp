// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shiftlab/cli/config.hpp"
#include "shiftlab/eval/artifacts.hpp"
#include "shiftlab/eval/report.hpp"

namespace shiftlab::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitRuntime = 3 };

/// A training run stopped on a non-finite value; maps to exit code 3.
class RunAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing or unreadable inputs; maps to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes train/valid/test JSONL files and manifest.json into `out`.
void cmd_gen(const synth::ShiftSpec& spec, const std::filesystem::path& out, bool gzip = false);

synth::DatasetBundle load_data(const std::filesystem::path& data_dir);

/// Trains one run and writes it below config.out_dir. Returns the run directory.
std::filesystem::path cmd_train(const CliConfig& config, const std::filesystem::path& data_dir);

/// Evaluates each run directory: metrics.json, predictions.csv, projection.csv,
/// projection.svg, plus separation.svg comparing all evaluated runs.
std::vector<eval::MetricsReport> cmd_eval(const std::vector<std::filesystem::path>& run_dirs,
                                          const std::filesystem::path& data_dir);

/// Writes every variant run plus ablation.csv and ablation.svg into config.out_dir.
train::AblationResult cmd_ablate(const CliConfig& config, const std::filesystem::path& data_dir, std::size_t seeds,
                                 std::size_t jobs);

struct SweepRow {
  std::string param;
  double requested = 0.0;
  double effective = 0.0;
  std::string config_hash;
  std::string run_id;
  double test_acc = 0.0;
  double best_valid_acc = 0.0;
  long best_epoch = -1;
};

/// Smallest tau the sweep runs with; a requested 0 is raised to this value.
inline constexpr double kMinSweepTau = 0.01;

/// Values 0.0, 0.1, ..., 1.0.
std::vector<double> sweep_grid();

/// Config of one grid cell. "alpha" sets both the triplet margin and the
/// adversarial triplet weight.
train::TrainConfig sweep_cell_config(const train::TrainConfig& base, const std::string& param, double value,
                                     double* effective = nullptr);

/// Runs the 11-point grid (or just `cell`) and writes sweep_<param>.csv and
/// sweep_<param>.svg (sweep_<param>_cell<k>.csv for a single cell).
std::vector<SweepRow> cmd_sweep(const CliConfig& config, const std::filesystem::path& data_dir,
                                const std::string& param, std::size_t jobs, std::optional<std::size_t> cell = {});

eval::CsvRow sweep_header();
eval::CsvRow sweep_csv_row(const SweepRow& r);

/// Parses argv and dispatches; returns the process exit code.
int run(int argc, char** argv);

}  // namespace shiftlab::cli
