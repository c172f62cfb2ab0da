// Copyright 2026 The fairpatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// fairpatch command-line driver.
//
//   fairpatch simulate --config sim.json --out data.csv
//   fairpatch train    --data data.csv --config train.json --out model.json --trace trace.csv
//   fairpatch evaluate --model model.json --data test.csv --out report.json
//   fairpatch sweep    --data data.csv --grid 0.1,0.9 --splits 10 --out frontier.csv
//   fairpatch split    --data data.csv --train-out train.csv --test-out test.csv
//
// Exit codes: 0 success, 2 usage or validation error, 1 runtime failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fairpatch/fairpatch.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fairpatch::cli {
namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

bool g_quiet = false;

void log(const std::string& message) {
  if (!g_quiet) std::cerr << "fairpatch: " << message << '\n';
}

/// Writes through a temporary sibling and renames into place.
void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const json& doc) {
  write_atomic(path, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw SchemaError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

/// `path` with its extension replaced, e.g. model.json -> model.importance.json.
fs::path sibling(const fs::path& path, const std::string& suffix) {
  fs::path out = path;
  out.replace_extension();
  out += suffix;
  return out;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string hex64(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << value;
  return out.str();
}

/// Provenance record written next to a command's primary output.
struct RunManifest {
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::vector<std::string> output_paths;
  std::string started_at;
  std::string finished_at;
  Warnings warnings;

  void write(const fs::path& path) {
    finished_at = utc_now();
    for (const auto& p : output_paths) {
      if (!fs::exists(p)) throw std::runtime_error("expected output missing: " + p);
    }
    write_json(path, json{{"schema_version", kSchemaVersion},
                          {"command", command},
                          {"config_digest", config_digest},
                          {"seed", seed},
                          {"output_paths", output_paths},
                          {"started_at", started_at},
                          {"finished_at", finished_at},
                          {"warnings", warnings}});
  }
};

RunManifest start_manifest(std::string command, const json& effective_config,
                           std::uint64_t seed) {
  RunManifest manifest;
  manifest.command = std::move(command);
  manifest.config_digest = "fnv1a64:" + hex64(fnv1a64(effective_config.dump()));
  manifest.seed = seed;
  manifest.started_at = utc_now();
  return manifest;
}

IngestConfig ingest_from(const std::string& path) {
  if (path.empty()) return IngestConfig{};
  return read_json(path).get<IngestConfig>();
}

LoadResult load_data(const std::string& path, const IngestConfig& ingest) {
  auto loaded = load_csv(path, ingest);
  log("loaded " + std::to_string(loaded.data.rows()) + " rows x " +
      std::to_string(loaded.data.cols()) + " features from " + path);
  for (const auto& w : loaded.warnings) log("warning: " + w);
  return loaded;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto value = parse_double(item);
    if (!value) throw ConfigError("grid value is not a number: '" + item + "'");
    if (!(*value >= 0.0 && *value <= 1.0)) {
      throw ConfigError("grid value outside [0, 1]: " + item);
    }
    grid.push_back(*value);
  }
  if (grid.empty()) throw ConfigError("grid is empty");
  return grid;
}

std::string join_indices(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k > 0) out.push_back(' ');
    out += std::to_string(values[k]);
  }
  return out;
}

std::size_t worker_count() {
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FAIRPATCH_THREADS")) {
    const auto value = parse_double(env);
    if (!value || *value < 1) throw ConfigError("FAIRPATCH_THREADS must be a positive integer");
    workers = std::min(workers, static_cast<std::size_t>(*value));
  }
  return workers;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& args) {
  SimulationConfig config;
  if (!args.config.empty()) config = read_json(args.config).get<SimulationConfig>();
  if (args.seed) config.seed = *args.seed;
  config.validate();
  auto manifest = start_manifest("simulate", json(config), config.seed);

  const Dataset data = simulate(config);
  const fs::path out = args.out;
  const fs::path groups = sibling(out, ".groups.json");
  write_atomic(out, [&](std::ostream& os) { write_dataset_csv(os, data); });
  write_json(groups, json{{"schema_version", kSchemaVersion},
                          {"config", config},
                          {"groups", group_ranges(config)}});
  manifest.output_paths = {out.string(), groups.string()};
  manifest.write(sibling(out, ".manifest.json"));
  log("wrote " + std::to_string(data.rows()) + " rows to " + out.string());
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string config;
  std::string ingest;
  std::string out;
  std::string trace;
  std::string report;
  std::string q_trace;
  std::string p_trace;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
};

int run_train(const TrainArgs& args) {
  TrainConfig config;
  if (!args.config.empty()) config = read_json(args.config).get<TrainConfig>();
  if (args.seed) config.seed = *args.seed;
  if (args.alpha) config.alpha = *args.alpha;
  config.validate();
  const IngestConfig ingest = ingest_from(args.ingest);
  auto manifest =
      start_manifest("train", json{{"train", config}, {"ingest", ingest}}, config.seed);

  const auto loaded = load_data(args.data, ingest);
  const Dataset& data = loaded.data;
  manifest.warnings = loaded.warnings;

  const fs::path model_path = args.out;
  const fs::path trace_path = args.trace.empty() ? sibling(model_path, ".trace.csv") : fs::path(args.trace);
  const fs::path report_path =
      args.report.empty() ? sibling(model_path, ".importance.json") : fs::path(args.report);
  const fs::path q_path = args.q_trace.empty() ? sibling(trace_path, ".q.csv") : fs::path(args.q_trace);

  std::ostringstream q_trace;
  std::ostringstream p_trace;
  q_trace << "iteration,index,probability\n";
  p_trace << "iteration,index,probability\n";
  const bool want_p = !args.p_trace.empty();
  const auto observer = [&](const IterationRecord& record, const SamplerState& state) {
    for (std::size_t j = 0; j < state.q().size(); ++j) {
      q_trace << record.t << ',' << j << ',' << format_double(state.q()[j]) << '\n';
    }
    if (want_p) {
      for (std::size_t i = 0; i < state.p().size(); ++i) {
        p_trace << record.t << ',' << i << ',' << format_double(state.p()[i]) << '\n';
      }
    }
  };
  const TrainResult result = train(data, config, observer);
  for (const auto& w : result.warnings) {
    log("warning: " + w);
    manifest.warnings.push_back(w);
  }
  log("trained " + std::to_string(result.iterations_run) + " iterations, kept " +
      std::to_string(result.ensemble.iteration_count()) + " trees (best oop " +
      format_double(result.tracker.best_oop) + ")");

  const Model model = make_model(result, config, data.feature_names());
  write_json(model_path, model_to_json(model));
  write_atomic(trace_path, [&](std::ostream& os) {
    os << "t,oop,cols,rows\n";
    for (const auto& r : result.records) {
      os << r.t << ',' << format_double(r.oop) << ',' << join_indices(r.patch.cols) << ','
         << join_indices(r.patch.rows) << '\n';
    }
  });
  write_atomic(q_path, [&](std::ostream& os) { os << q_trace.str(); });

  json report = result.report;
  report["schema_version"] = kSchemaVersion;
  report["feature_names"] = data.feature_names();
  report["alpha"] = config.alpha;
  report["burn_in"] = config.burn_in;
  report["iterations_run"] = result.iterations_run;
  report["trees_kept"] = result.ensemble.iteration_count();
  report["patch_rows"] = result.patch_rows;
  report["patch_cols"] = result.patch_cols;
  report["warnings"] = result.warnings;
  write_json(report_path, report);

  manifest.output_paths = {model_path.string(), trace_path.string(), q_path.string(),
                           report_path.string()};
  if (want_p) {
    write_atomic(args.p_trace, [&](std::ostream& os) { os << p_trace.str(); });
    manifest.output_paths.push_back(args.p_trace);
  }
  manifest.write(sibling(model_path, ".manifest.json"));
  return 0;
}

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::string ingest;
  std::string out;
};

int run_evaluate(const EvaluateArgs& args) {
  const Model model = model_from_json(read_json(args.model));
  const IngestConfig ingest = ingest_from(args.ingest);
  auto manifest = start_manifest("evaluate", json{{"model", args.model}, {"ingest", ingest}},
                                 model.config.seed);
  const auto loaded = load_data(args.data, ingest);
  const auto& names = loaded.data.feature_names();
  const std::size_t common = std::min(names.size(), model.feature_names.size());
  for (std::size_t j = 0; j < common; ++j) {
    if (names[j] != model.feature_names[j]) {
      throw SchemaError("feature mismatch at column " + std::to_string(j) + ": model has '" +
                        model.feature_names[j] + "', data has '" + names[j] + "'");
    }
  }
  if (names.size() != model.feature_names.size()) {
    throw SchemaError("feature count mismatch: model has " +
                      std::to_string(model.feature_names.size()) + ", data has " +
                      std::to_string(names.size()));
  }
  const EvaluationReport report = evaluate(model.ensemble, loaded.data);
  write_json(args.out, report);
  manifest.warnings = loaded.warnings;
  manifest.warnings.insert(manifest.warnings.end(), report.warnings.begin(),
                           report.warnings.end());
  manifest.output_paths = {args.out};
  manifest.write(sibling(args.out, ".manifest.json"));
  log("accuracy " + format_double(report.accuracy) + ", fairness " +
      format_double(report.fairness_score));
  return 0;
}

struct SweepArgs {
  std::string data;
  std::string config;
  std::string ingest;
  std::string grid;
  std::string out;
  std::size_t splits = 10;
  double test_fraction = 0.3;
  std::optional<std::uint64_t> seed;
};

int run_sweep(const SweepArgs& args) {
  const auto grid = parse_grid(args.grid);
  if (args.splits < 1) throw ConfigError("--splits must be at least 1");
  TrainConfig base;
  if (!args.config.empty()) base = read_json(args.config).get<TrainConfig>();
  if (args.seed) base.seed = *args.seed;
  base.validate();
  const IngestConfig ingest = ingest_from(args.ingest);
  auto manifest = start_manifest("sweep",
                                 json{{"train", base},
                                      {"ingest", ingest},
                                      {"grid", grid},
                                      {"splits", args.splits},
                                      {"test_fraction", args.test_fraction}},
                                 base.seed);
  const auto loaded = load_data(args.data, ingest);
  manifest.warnings = loaded.warnings;

  SweepOptions options;
  options.test_fraction = args.test_fraction;
  options.workers = worker_count();
  const SweepResult sweep = alpha_sweep(loaded.data, grid, base, args.splits, options);

  const fs::path cells_path = args.out;
  const fs::path summary_path = sibling(cells_path, ".summary.csv");
  const fs::path long_path = sibling(cells_path, ".long.csv");
  write_atomic(cells_path, [&](std::ostream& os) {
    os << "alpha,split,accuracy,fairness_score,dp_gap,dp_ratio\n";
    for (const auto& c : sweep.cells) {
      os << format_double(c.alpha) << ',' << c.split << ',' << format_double(c.report.accuracy)
         << ',' << format_double(c.report.fairness_score) << ','
         << format_double(c.report.dp_gap) << ',' << format_double(c.report.dp_ratio) << '\n';
    }
  });
  write_atomic(summary_path, [&](std::ostream& os) {
    os << "alpha,splits,mean_accuracy,sd_accuracy,mean_fairness_score,sd_fairness_score\n";
    for (const auto& s : sweep.summary) {
      os << format_double(s.alpha) << ',' << s.splits << ',' << format_double(s.mean_accuracy)
         << ',' << format_double(s.sd_accuracy) << ',' << format_double(s.mean_fairness) << ','
         << format_double(s.sd_fairness) << '\n';
    }
  });
  write_atomic(long_path, [&](std::ostream& os) {
    os << "alpha,split,metric,value\n";
    for (const auto& c : sweep.cells) {
      const std::pair<const char*, double> metrics[] = {
          {"accuracy", c.report.accuracy},
          {"fairness_score", c.report.fairness_score},
          {"dp_gap", c.report.dp_gap},
          {"dp_ratio", c.report.dp_ratio}};
      for (const auto& [name, value] : metrics) {
        os << format_double(c.alpha) << ',' << c.split << ',' << name << ','
           << format_double(value) << '\n';
      }
    }
  });
  manifest.output_paths = {cells_path.string(), summary_path.string(), long_path.string()};
  manifest.write(sibling(cells_path, ".manifest.json"));
  for (const auto& s : sweep.summary) {
    log("alpha " + format_double(s.alpha) + ": accuracy " + format_double(s.mean_accuracy) +
        ", fairness " + format_double(s.mean_fairness));
  }
  return 0;
}

struct SplitArgs {
  std::string data;
  std::string ingest;
  std::string train_out;
  std::string test_out;
  double test_fraction = 0.3;
  std::uint64_t seed = 0;
};

int run_split(const SplitArgs& args) {
  const IngestConfig ingest = ingest_from(args.ingest);
  auto manifest = start_manifest(
      "split", json{{"ingest", ingest}, {"test_fraction", args.test_fraction}}, args.seed);
  const auto loaded = load_data(args.data, ingest);
  const auto split = train_test_split(loaded.data, args.test_fraction, args.seed);
  write_atomic(args.train_out, [&](std::ostream& os) { write_dataset_csv(os, split.train); });
  write_atomic(args.test_out, [&](std::ostream& os) { write_dataset_csv(os, split.test); });
  manifest.warnings = loaded.warnings;
  manifest.warnings.insert(manifest.warnings.end(), split.warnings.begin(),
                           split.warnings.end());
  manifest.output_paths = {args.train_out, args.test_out};
  manifest.write(sibling(args.train_out, ".manifest.json"));
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"fairpatch: fair minipatch boosting"};
  app.require_subcommand(1);
  app.add_flag("--quiet", g_quiet, "suppress progress messages");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "generate the synthetic four-group dataset");
  simulate_cmd->add_option("--config", sim.config, "SimulationConfig JSON (defaults if omitted)")
      ->check(CLI::ExistingFile);
  simulate_cmd->add_option("--out", sim.out, "dataset CSV to write")->required();
  simulate_cmd->add_option("--seed", sim.seed, "override the config seed");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a model and write its traces");
  train_cmd->add_option("--data", tr.data, "training CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--config", tr.config, "TrainConfig JSON")->check(CLI::ExistingFile);
  train_cmd->add_option("--ingest", tr.ingest, "IngestConfig JSON")->check(CLI::ExistingFile);
  train_cmd->add_option("--out", tr.out, "model JSON to write")->required();
  train_cmd->add_option("--trace", tr.trace, "per-iteration trace CSV");
  train_cmd->add_option("--report", tr.report, "importance report JSON");
  train_cmd->add_option("--q-trace", tr.q_trace, "feature probability trace CSV");
  train_cmd->add_option("--p-trace", tr.p_trace, "observation probability trace CSV (large)");
  train_cmd->add_option("--seed", tr.seed, "override the config seed");
  train_cmd->add_option("--alpha", tr.alpha, "override the config alpha");

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a model on a dataset");
  evaluate_cmd->add_option("--model", ev.model, "model JSON")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--data", ev.data, "evaluation CSV")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--ingest", ev.ingest, "IngestConfig JSON")->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out", ev.out, "EvaluationReport JSON to write")->required();

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "fairness-accuracy sweep over an alpha grid");
  sweep_cmd->add_option("--data", sw.data, "dataset CSV")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--grid", sw.grid, "comma-separated alpha values")->required();
  sweep_cmd->add_option("--splits", sw.splits, "train/test splits per alpha");
  sweep_cmd->add_option("--config", sw.config, "base TrainConfig JSON")->check(CLI::ExistingFile);
  sweep_cmd->add_option("--ingest", sw.ingest, "IngestConfig JSON")->check(CLI::ExistingFile);
  sweep_cmd->add_option("--test-fraction", sw.test_fraction, "held-out fraction per split");
  sweep_cmd->add_option("--out", sw.out, "per-cell frontier CSV to write")->required();
  sweep_cmd->add_option("--seed", sw.seed, "override the config seed");

  SplitArgs sp;
  auto* split_cmd = app.add_subcommand("split", "stratified train/test split of a dataset");
  split_cmd->add_option("--data", sp.data, "dataset CSV")->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--ingest", sp.ingest, "IngestConfig JSON")->check(CLI::ExistingFile);
  split_cmd->add_option("--train-out", sp.train_out, "train CSV to write")->required();
  split_cmd->add_option("--test-out", sp.test_out, "test CSV to write")->required();
  split_cmd->add_option("--test-fraction", sp.test_fraction, "held-out fraction");
  split_cmd->add_option("--seed", sp.seed, "split seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*simulate_cmd) return run_simulate(sim);
    if (*train_cmd) return run_train(tr);
    if (*evaluate_cmd) return run_evaluate(ev);
    if (*sweep_cmd) return run_sweep(sw);
    if (*split_cmd) return run_split(sp);
  } catch (const ConfigError& e) {
    std::cerr << "fairpatch: configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SchemaError& e) {
    std::cerr << "fairpatch: schema error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "fairpatch: data error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "fairpatch: schema error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "fairpatch: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace fairpatch::cli

int main(int argc, char** argv) { return fairpatch::cli::run(argc, argv); }
