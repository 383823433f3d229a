// Copyright 2026 The permglm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "permglm/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "permglm/dataset_io.hpp"
#include "permglm/envelope.hpp"
#include "permglm/error.hpp"
#include "permglm/experiment.hpp"
#include "permglm/pipeline.hpp"
#include "permglm/results_io.hpp"
#include "permglm/synthetic.hpp"
#include "text_util.hpp"

namespace permglm::cli {
namespace {

namespace fs = std::filesystem;

/// Output files are written into a staging directory and moved into place
/// only when the command succeeds.
class StagedOutput {
 public:
  explicit StagedOutput(const fs::path& out_dir) : out_dir_(out_dir) {
    fs::create_directories(out_dir_);
    staging_ = out_dir_ / ".permglm-partial";
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  StagedOutput(const StagedOutput&) = delete;
  StagedOutput& operator=(const StagedOutput&) = delete;
  ~StagedOutput() {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }

  fs::path path(const std::string& name) const { return staging_ / name; }

  void commit() {
    for (const auto& entry : fs::directory_iterator(staging_))
      fs::rename(entry.path(), out_dir_ / entry.path().filename());
  }

 private:
  fs::path out_dir_;
  fs::path staging_;
};

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << body;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

void RunConfig::validate() const {
  if (permutations < 1) throw ConfigError("--permutations must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
  if (methods.empty()) throw ConfigError("--methods must name at least one method");
  switch (command) {
    case Command::test:
      if (data.empty() || design.empty()) throw ConfigError("test needs --data and --design");
      break;
    case Command::envelope_export:
      if (results.empty() || data.empty() || design.empty())
        throw ConfigError("envelope-export needs --results, --data and --design");
      break;
    case Command::experiment:
      if (experiment_config.empty() == preset.empty())
        throw ConfigError("experiment needs exactly one of --config and --preset");
      break;
    case Command::simulate:
      parse_model(model);
      parse_error_kind(error);
      break;
  }
}

std::size_t resolve_threads(std::size_t flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("PERMGLM_THREADS")) {
    std::size_t v = 0;
    if (text::parse_size(env, v) && v > 0) return v;
    std::cerr << "warning: ignoring invalid PERMGLM_THREADS='" << env << "'\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_test(const RunConfig& config) {
  config.validate();
  const auto dataset = load_dataset(config.data, format_for_path(config.data));
  const auto design = load_design(config.design);
  TestConfig tc;
  tc.methods = config.methods;
  tc.permutations = config.permutations;
  tc.alpha = config.alpha;
  tc.seed = config.seed.value_or(1);
  tc.scheme = config.scheme;
  tc.streaming = config.streaming;
  tc.threads = resolve_threads(config.threads);
  if (!alpha_resolvable(config.permutations + 1, config.alpha))
    std::cerr << "warning: alpha * (J + 1) < 1, no rejection is possible\n";
  const auto result = run_test(dataset, design, tc);

  StagedOutput out(config.out_dir);
  save_results(result, out.path("results.json"));
  out.commit();
  for (const auto& m : result.methods)
    std::cout << to_string(m.method) << ": p = " << text::format_double(m.p_value)
              << ", rejected locations = " << m.envelope.rejection_count() << '\n';
  return result.any_rejected() ? kRejected : kSuccess;
}

int cmd_simulate(const RunConfig& config) {
  config.validate();
  FieldSpec spec;
  spec.width = config.width;
  spec.height = config.height;
  spec.sigma = config.sigma;
  spec.error = parse_error_kind(config.error);
  spec.model = parse_model(config.model);
  spec.subjects_per_group = config.subjects_per_group;
  spec.seed = config.seed.value_or(1);
  const auto [dataset, design] = simulate_dataset(spec);
  StagedOutput out(config.out_dir);
  save_dataset(dataset, out.path("data.csv"), DataFormat::csv);
  save_design(design, out.path("design.csv"));
  out.commit();
  return kSuccess;
}

int cmd_experiment(const RunConfig& config) {
  config.validate();
  ExperimentConfig cfg = config.preset.empty() ? load_experiment_config(config.experiment_config)
                                               : experiment_preset(config.preset);
  if (config.replicates > 0) cfg.replicates = config.replicates;
  if (config.seed) cfg.seed = *config.seed;
  cfg.validate();
  const ExperimentOptions opts{.threads = resolve_threads(config.threads), .block_width = 16};

  StagedOutput out(config.out_dir);
  for (auto error : cfg.errors) {
    std::vector<ExperimentReport> reports;
    nlohmann::json doc;
    doc["name"] = cfg.name;
    doc["model"] = std::string(to_string(cfg.model));
    doc["error"] = std::string(to_string(error));
    doc["replicates"] = cfg.replicates;
    doc["permutations"] = cfg.permutations;
    doc["alpha"] = cfg.alpha;
    doc["seed"] = cfg.seed;
    doc["columns"] = nlohmann::json::array();
    for (std::size_t i = 0; i < cfg.sigmas.size(); ++i) {
      FieldSpec spec;
      spec.width = cfg.width;
      spec.height = cfg.height;
      spec.rho = cfg.rho;
      spec.sigma = cfg.sigmas[i];
      spec.error = error;
      spec.model = cfg.model;
      spec.subjects_per_group = cfg.subjects_per_group;
      spec.seed = mix_seed(cfg.seed, (static_cast<std::uint64_t>(error) << 8) | i);
      std::cerr << "experiment " << to_string(cfg.model) << "(" << to_string(error)
                << ") sigma=" << text::format_double(spec.sigma) << '\n';
      auto report = run_experiment(spec, cfg.replicates, cfg.permutations, cfg.alpha,
                                   cfg.methods, opts);
      nlohmann::json col;
      col["sigma"] = spec.sigma;
      for (auto kind : report.methods) {
        const auto name = std::string(to_string(kind));
        col["rates"][name] = report.rates.at(kind);
        col["ci_half_width"][name] = report.ci_half_width.at(kind);
        col["p_values"][name] = report.p_values.at(kind);
      }
      doc["columns"].push_back(std::move(col));
      reports.push_back(std::move(report));
    }
    const std::string stem =
        cfg.name + "_" + std::string(to_string(cfg.model)) + std::string(to_string(error));
    const auto table = format_rate_table(reports);
    write_text(out.path(stem + ".csv"), table);
    write_text(out.path(stem + ".json"), doc.dump(2) + "\n");
    std::cout << stem << '\n' << table;
  }
  out.commit();
  return kSuccess;
}

int cmd_envelope_export(const RunConfig& config) {
  config.validate();
  const auto previous = load_results(config.results);
  if (config.seed && *config.seed != previous.seed)
    throw ConsistencyError("--seed " + std::to_string(*config.seed) +
                           " does not match the seed of the measure pass (" +
                           std::to_string(previous.seed) + ")");
  const auto dataset = load_dataset(config.data, format_for_path(config.data));
  const auto design = load_design(config.design);
  if (dataset.locations() != previous.locations)
    throw ConsistencyError("dataset does not match the results file");
  const auto plan = generate_plan(previous.seed, previous.permutations, dataset.subjects(),
                                  previous.scheme);
  std::vector<MeasureVector> measures;
  for (const auto& m : previous.methods) measures.push_back(m.measure);
  StreamingOptions opts;
  opts.threads = resolve_threads(config.threads);
  const auto envs = upper_envelopes(dataset, design, plan, measures, previous.alpha,
                                    previous.plan_fingerprint, opts);
  StagedOutput out(config.out_dir);
  for (const auto& env : envs) {
    const std::string name(to_string(env.method));
    write_envelope_csv(env, dataset.location_ids, out.path("envelope_" + name + ".csv"));
    if (dataset.domain.kind == Domain::Kind::grid)
      write_envelope_grids(env, dataset.domain.width, dataset.domain.height,
                           out.path("envelope_" + name));
  }
  out.commit();
  return kSuccess;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Permutation inference for general linear models over images"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string methods = "fmax,pmin,erl,cont,area";
  std::string scheme = "raw";
  std::string streaming = "on";
  std::uint64_t seed = 1;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--threads", cfg.threads,
                    "Worker threads (default: PERMGLM_THREADS, then all cores)");
  };
  auto test_options = [&](CLI::App* sub) {
    sub->add_option("--methods", methods, "Comma-separated subset of fmax,pmin,erl,cont,area")
        ->capture_default_str();
    sub->add_option("--permutations", cfg.permutations, "Number of permutations J")
        ->capture_default_str();
    sub->add_option("--alpha", cfg.alpha, "Significance level")->capture_default_str();
    sub->add_option("--scheme", scheme, "raw or freedman-lane")->capture_default_str();
    sub->add_option("--streaming", streaming, "on or off")->capture_default_str();
  };

  auto* test = app.add_subcommand("test", "Run the permutation test on a dataset");
  test->add_option("--data", cfg.data, "Dataset (.csv, or .bin/.raw binary)")->required();
  test->add_option("--design", cfg.design, "Design file")->required();
  test_options(test);
  common(test);

  auto* simulate = app.add_subcommand("simulate", "Write a synthetic dataset and design");
  simulate->add_option("--model", cfg.model, "M0, M1, M1prime or M2")->capture_default_str();
  simulate->add_option("--error", cfg.error, "Error structure a..g")->capture_default_str();
  simulate->add_option("--sigma", cfg.sigma, "Error standard deviation")->capture_default_str();
  simulate->add_option("--width", cfg.width, "Grid width")->capture_default_str();
  simulate->add_option("--height", cfg.height, "Grid height")->capture_default_str();
  simulate->add_option("--subjects-per-group", cfg.subjects_per_group, "Subjects per group")
      ->capture_default_str();
  common(simulate);

  auto* experiment = app.add_subcommand("experiment", "Estimate rejection rates by simulation");
  experiment->add_option("--config", cfg.experiment_config, "Experiment JSON");
  experiment->add_option("--preset", cfg.preset, "Named preset, e.g. table-M1c");
  experiment->add_option("--replicates", cfg.replicates, "Override the replicate count");
  common(experiment);

  auto* envelope = app.add_subcommand("envelope-export",
                                      "Recompute envelopes of a previous test run as grids");
  envelope->add_option("--results", cfg.results, "results.json of the test run")->required();
  envelope->add_option("--data", cfg.data, "Dataset used by the test run")->required();
  envelope->add_option("--design", cfg.design, "Design used by the test run")->required();
  common(envelope);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kFailure;
  }

  try {
    cfg.methods = parse_measure_list(methods);
    cfg.scheme = parse_scheme(scheme);
    if (streaming == "on") {
      cfg.streaming = true;
    } else if (streaming == "off") {
      cfg.streaming = false;
    } else {
      throw ConfigError("--streaming must be on or off");
    }
    const auto* chosen = app.get_subcommands().front();
    if (chosen->count("--seed") > 0) cfg.seed = seed;
    if (chosen == test) {
      cfg.command = Command::test;
      return cmd_test(cfg);
    }
    if (chosen == simulate) {
      cfg.command = Command::simulate;
      return cmd_simulate(cfg);
    }
    if (chosen == experiment) {
      cfg.command = Command::experiment;
      return cmd_experiment(cfg);
    }
    cfg.command = Command::envelope_export;
    return cmd_envelope_export(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace permglm::cli
