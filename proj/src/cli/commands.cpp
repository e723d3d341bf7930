// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/cli/commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>

#include "shiftlab/errors.hpp"

namespace shiftlab::cli {
namespace fs = std::filesystem;
namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) { eval::write_text(path, j.dump(2) + "\n"); }

std::string num(double v) { return eval::format_number(v); }

void check_finished(const train::TrainResult& r) {
  if (r.record.status != "ok") throw RunAborted("run " + r.record.run_id + " aborted: " + r.record.diagnostic);
}

}  // namespace

void cmd_gen(const synth::ShiftSpec& spec, const fs::path& out, bool gzip) {
  synth::save_bundle(synth::generate(spec), out, gzip);
}

synth::DatasetBundle load_data(const fs::path& data_dir) {
  if (!fs::exists(data_dir / "manifest.json")) throw InputError("no dataset at " + data_dir.string() + " (manifest.json missing)");
  try {
    return synth::load_bundle(data_dir);
  } catch (const ParseError& e) {
    throw InputError(std::string("unreadable dataset: ") + e.what());
  }
}

fs::path cmd_train(const CliConfig& config, const fs::path& data_dir) {
  const synth::DatasetBundle bundle = load_data(data_dir);
  const train::TrainResult r = train::train(bundle, config.train);
  const fs::path dir = train::write_run(r, config.out_dir);
  check_finished(r);
  return dir;
}

std::vector<eval::MetricsReport> cmd_eval(const std::vector<fs::path>& run_dirs, const fs::path& data_dir) {
  if (run_dirs.empty()) throw InputError("eval needs at least one run directory");
  const synth::DatasetBundle bundle = load_data(data_dir);
  std::vector<eval::MetricsReport> reports;
  std::vector<eval::Bar> bars;
  for (const fs::path& dir : run_dirs) {
    const train::RunRecord rec = train::record_from_json(read_json(dir / "record.json"));
    const train::TrainConfig cfg = rec.config.get<train::TrainConfig>();
    const model::ModelParams params = model::params_from_checkpoint(read_json(dir.parent_path() / rec.checkpoint));
    eval::MetricsReport report = eval::build_report(params, cfg.method, bundle, cfg.eval_batch);

    nlohmann::json metrics = eval::to_json(report);
    metrics["run_id"] = rec.run_id;
    metrics["method"] = train::to_string(cfg.method);
    write_json(dir / "metrics.json", metrics);

    const auto preds = eval::predictions(params, cfg.method, bundle.test, cfg.eval_batch);
    eval::CsvRow header{"graph_id", "env", "label", "predicted"};
    for (std::size_t k = 0; k < bundle.spec.num_classes; ++k) header.push_back("p" + std::to_string(k));
    std::vector<eval::CsvRow> rows;
    for (const auto& p : preds) {
      eval::CsvRow row{std::to_string(p.graph_id), p.env, std::to_string(p.label), std::to_string(p.predicted)};
      for (double v : p.probs) row.push_back(num(v));
      rows.push_back(std::move(row));
    }
    eval::write_csv(dir / "predictions.csv", header, rows);

    std::vector<eval::CsvRow> proj_rows;
    std::vector<eval::ScatterPoint> scatter;
    for (const auto& p : report.projection_points) {
      proj_rows.push_back({num(p.x), num(p.y), p.type, std::to_string(p.graph_id)});
      scatter.push_back({p.x, p.y, p.type});
    }
    eval::write_csv(dir / "projection.csv", {"x", "y", "type", "graph_id"}, proj_rows);
    eval::write_text(dir / "projection.svg",
                     eval::svg_scatter("Stable vs environment embeddings (" + rec.run_id + ")", scatter));
    if (report.separation_ratio) bars.push_back({train::to_string(cfg.method), *report.separation_ratio, 0.0});
    reports.push_back(std::move(report));
  }
  const std::string chart = eval::svg_bars("Separation ratio", bars);
  for (const fs::path& dir : run_dirs) eval::write_text(dir / "separation.svg", chart);
  return reports;
}

train::AblationResult cmd_ablate(const CliConfig& config, const fs::path& data_dir, std::size_t seeds,
                                 std::size_t jobs) {
  if (seeds == 0) throw ContractError("ablate needs --seeds >= 1");
  const synth::DatasetBundle bundle = load_data(data_dir);
  std::vector<std::uint64_t> seed_list;
  for (std::size_t s = 0; s < seeds; ++s) seed_list.push_back(config.train.seed + s);
  train::AblationResult result = train::ablate(bundle, config.train, seed_list, jobs);

  std::vector<eval::CsvRow> rows;
  std::vector<eval::Bar> bars;
  eval::CsvRow header{"variant", "mean", "std", "median"};
  for (std::uint64_t s : seed_list) header.push_back("seed" + std::to_string(s));
  for (const auto& v : result.summary) {
    eval::CsvRow row{v.variant, num(v.mean), num(v.stddev), num(v.median)};
    for (double a : v.test_acc) row.push_back(num(a));
    rows.push_back(std::move(row));
    bars.push_back({v.variant, v.mean, v.stddev});
  }
  for (const auto& [name, runs] : result.runs)
    for (const auto& r : runs) train::write_run(r, config.out_dir);
  eval::write_csv(fs::path(config.out_dir) / "ablation.csv", header, rows);
  eval::write_text(fs::path(config.out_dir) / "ablation.svg", eval::svg_bars("Ablation: test accuracy", bars));
  for (const auto& [name, runs] : result.runs)
    for (const auto& r : runs) check_finished(r);
  return result;
}

std::vector<double> sweep_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 10; ++k) g.push_back(static_cast<double>(k) / 10.0);
  return g;
}

train::TrainConfig sweep_cell_config(const train::TrainConfig& base, const std::string& param, double value,
                                     double* effective) {
  train::TrainConfig c = base;
  double eff = value;
  if (param == "tau") {
    eff = std::max(value, kMinSweepTau);
    c.weights.tau = eff;
  } else if (param == "lambda") {
    c.weights.lambda = value;
  } else if (param == "alpha") {
    c.weights.alpha_margin = value;
    c.weights.alpha_adv = value;
  } else {
    throw ContractError("unknown sweep parameter '" + param + "' (valid: tau, lambda, alpha)");
  }
  if (effective) *effective = eff;
  return c;
}

eval::CsvRow sweep_header() {
  return {"param", "value", "effective_value", "config_hash", "run_id", "test_acc", "best_valid_acc", "best_epoch"};
}

eval::CsvRow sweep_csv_row(const SweepRow& r) {
  return {r.param,  num(r.requested),  num(r.effective),       r.config_hash,
          r.run_id, num(r.test_acc),   num(r.best_valid_acc),  std::to_string(r.best_epoch)};
}

std::vector<SweepRow> cmd_sweep(const CliConfig& config, const fs::path& data_dir, const std::string& param,
                                std::size_t jobs, std::optional<std::size_t> cell) {
  sweep_cell_config(config.train, param, 0.5);  // validates the parameter name
  const auto grid = sweep_grid();
  if (cell && *cell >= grid.size()) throw ContractError("--cell must lie in [0, " + std::to_string(grid.size() - 1) + "]");
  const synth::DatasetBundle bundle = load_data(data_dir);

  std::vector<std::size_t> cells;
  if (cell) cells.push_back(*cell);
  else
    for (std::size_t k = 0; k < grid.size(); ++k) cells.push_back(k);

  std::vector<SweepRow> rows(cells.size());
  std::vector<std::optional<train::TrainResult>> results(cells.size());
  train::parallel_for(cells.size(), jobs, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.param = param;
    row.requested = grid[cells[i]];
    const train::TrainConfig c = sweep_cell_config(config.train, param, row.requested, &row.effective);
    results[i] = train::train(bundle, c);
    row.config_hash = train::config_hash(c);
    row.run_id = results[i]->record.run_id;
    row.test_acc = results[i]->record.test_acc;
    row.best_valid_acc = results[i]->record.best_valid_acc;
    row.best_epoch = results[i]->record.best_epoch;
  });

  const fs::path out = config.out_dir;
  for (const auto& r : results) train::write_run(*r, out);
  std::vector<eval::CsvRow> csv;
  for (const auto& r : rows) csv.push_back(sweep_csv_row(r));
  if (cell) {
    eval::write_csv(out / ("sweep_" + param + "_cell" + std::to_string(*cell) + ".csv"), sweep_header(), csv);
  } else {
    eval::write_csv(out / ("sweep_" + param + ".csv"), sweep_header(), csv);
    eval::Series s{"test accuracy", {}, {}};
    for (const auto& r : rows) {
      s.x.push_back(r.requested);
      s.y.push_back(r.test_acc);
    }
    eval::write_text(out / ("sweep_" + param + ".svg"), eval::svg_lines("Sensitivity to " + param, param, {s}));
  }
  for (const auto& r : results) check_finished(*r);
  return rows;
}

int run(int argc, char** argv) {
  CLI::App app{"shiftlab: synthetic graph distribution-shift lab"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir, spec_path, param;
  std::vector<std::string> run_dirs;
  std::optional<std::uint64_t> seed;
  bool gzip = false;
  std::size_t seeds = 5, jobs = 1;
  std::optional<std::size_t> cell;

  auto* gen = app.add_subcommand("gen", "generate a dataset bundle");
  gen->add_option("--config", config_path, "JSON config ({spec, train, out_dir})");
  gen->add_option("--spec", spec_path, "JSON shift spec (alternative to --config)");
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--seed", seed, "dataset seed (spec.seed)");
  gen->add_flag("--gzip", gzip, "write .jsonl.gz files");

  auto* tr = app.add_subcommand("train", "train one run");
  tr->add_option("--config", config_path, "JSON config");
  tr->add_option("--data", data_dir, "dataset directory")->required();
  tr->add_option("--seed", seed, "run seed (train.seed)");

  auto* ev = app.add_subcommand("eval", "evaluate run directories");
  ev->add_option("--run", run_dirs, "run directory (repeatable)")->required();
  ev->add_option("--data", data_dir, "dataset directory")->required();

  auto* ab = app.add_subcommand("ablate", "run the four ablation variants over several seeds");
  ab->add_option("--config", config_path, "JSON config");
  ab->add_option("--data", data_dir, "dataset directory")->required();
  ab->add_option("--seeds", seeds, "number of seeds, starting at train.seed");
  ab->add_option("--jobs", jobs, "concurrent runs");
  ab->add_option("--seed", seed, "first seed (train.seed)");

  auto* sw = app.add_subcommand("sweep", "sweep one loss weight over 0.0..1.0");
  sw->add_option("--config", config_path, "JSON config");
  sw->add_option("--data", data_dir, "dataset directory")->required();
  sw->add_option("--param", param, "tau, lambda or alpha")->required();
  sw->add_option("--jobs", jobs, "concurrent runs");
  sw->add_option("--cell", cell, "run only this grid index (0..10)");
  sw->add_option("--seed", seed, "run seed (train.seed)");

  for (auto* sub : {gen, tr, ab, sw}) sub->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    std::vector<std::string> overrides = active->remaining();
    if (seed) overrides.push_back((active == gen ? "--spec.seed=" : "--train.seed=") + std::to_string(*seed));

    if (active == gen) {
      CliConfig cfg;
      if (!spec_path.empty()) {
        if (!config_path.empty()) throw ContractError("give either --config or --spec, not both");
        nlohmann::json doc = {{"spec", read_json(spec_path)}};
        for (const auto& o : overrides) {
          std::string text = o.rfind("--", 0) == 0 ? o.substr(2) : o;
          const auto eq = text.find('=');
          if (eq == std::string::npos) throw ContractError("override '" + o + "' is not of the form --key=value");
          apply_override(doc, text.substr(0, eq), text.substr(eq + 1));
        }
        cfg = config_from_json(doc);
        cfg.spec.validate();
      } else {
        cfg = load_config(config_path, overrides);
      }
      cmd_gen(cfg.spec, out_dir, gzip);
      std::cout << out_dir << '\n';
    } else if (active == tr) {
      const CliConfig cfg = load_config(config_path, overrides);
      std::cout << cmd_train(cfg, data_dir).string() << '\n';
    } else if (active == ev) {
      std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
      const auto reports = cmd_eval(dirs, data_dir);
      for (std::size_t i = 0; i < dirs.size(); ++i) {
        std::cout << dirs[i].string() << ": test_accuracy=" << num(reports[i].test_accuracy) << '\n';
      }
    } else if (active == ab) {
      const CliConfig cfg = load_config(config_path, overrides);
      const auto result = cmd_ablate(cfg, data_dir, seeds, jobs);
      for (const auto& v : result.summary) {
        std::cout << v.variant << ": " << num(v.mean) << " +- " << num(v.stddev) << '\n';
      }
    } else if (active == sw) {
      const CliConfig cfg = load_config(config_path, overrides);
      for (const auto& r : cmd_sweep(cfg, data_dir, param, jobs, cell)) {
        std::cout << param << "=" << num(r.requested) << ": test_acc=" << num(r.test_acc) << '\n';
      }
    }
    return kExitOk;
  } catch (const RunAborted& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace shiftlab::cli
