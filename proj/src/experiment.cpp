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

#include "permglm/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "permglm/error.hpp"
#include "permglm/pipeline.hpp"
#include "text_util.hpp"

namespace permglm {

ExperimentReport run_experiment(const FieldSpec& spec, std::size_t replicates,
                                std::size_t permutations, double alpha,
                                const std::vector<MeasureKind>& methods,
                                const ExperimentOptions& options) {
  spec.validate();
  if (replicates < 1) throw ConfigError("need at least one replicate");
  if (permutations < 1) throw ConfigError("number of permutations must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const auto kinds = MeasureSet::from(methods);
  if (kinds.empty()) throw ConfigError("method set is empty");
  const Scheme scheme = spec.model == Model::M2 ? Scheme::freedman_lane : Scheme::raw;

  std::vector<std::map<MeasureKind, double>> results(replicates);
  auto run_one = [&](std::size_t rep) {
    FieldSpec local = spec;
    local.seed = mix_seed(spec.seed, 2 * rep);
    const auto [dataset, design] = simulate_dataset(local);
    const auto plan =
        generate_plan(mix_seed(spec.seed, 2 * rep + 1), permutations, dataset.subjects(), scheme);
    StreamingOptions opts;
    opts.block_width = options.block_width;
    results[rep] = run_pvalues(dataset, design, plan, kinds, opts);
  };

  const std::size_t threads = std::min(resolve_thread_count(options.threads), replicates);
  std::vector<std::exception_ptr> errors(replicates);
  if (threads == 1) {
    for (std::size_t rep = 0; rep < replicates; ++rep) run_one(rep);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < threads; ++w)
      workers.emplace_back([&] {
        for (std::size_t rep = next++; rep < replicates; rep = next++) {
          try {
            run_one(rep);
          } catch (...) {
            errors[rep] = std::current_exception();
          }
        }
      });
    workers.clear();
    for (std::size_t rep = 0; rep < replicates; ++rep)
      if (errors[rep]) {
        try {
          std::rethrow_exception(errors[rep]);
        } catch (const std::exception& e) {
          throw Error("replicate " + std::to_string(rep) + ": " + e.what());
        }
      }
  }

  ExperimentReport report;
  report.spec = spec;
  report.replicates = replicates;
  report.permutations = permutations;
  report.alpha = alpha;
  report.methods = kinds.kinds();
  for (auto kind : report.methods) {
    auto& ps = report.p_values[kind];
    std::size_t hits = 0;
    for (const auto& r : results) {
      ps.push_back(r.at(kind));
      if (r.at(kind) <= alpha) ++hits;
    }
    const double rate = static_cast<double>(hits) / static_cast<double>(replicates);
    report.rates[kind] = rate;
    report.ci_half_width[kind] =
        1.96 * std::sqrt(rate * (1.0 - rate) / static_cast<double>(replicates));
  }
  return report;
}

void ExperimentConfig::validate() const {
  if (errors.empty()) throw ConfigError("experiment needs at least one error kind");
  if (sigmas.empty()) throw ConfigError("experiment needs at least one sigma");
  for (double s : sigmas)
    if (!(s >= 0.0)) throw ConfigError("sigma must be non-negative");
  if (replicates < 50) throw ConfigError("experiments need at least 50 replicates");
  if (permutations < 1) throw ConfigError("number of permutations must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (methods.empty()) throw ConfigError("method set is empty");
  FieldSpec spec;
  spec.width = width;
  spec.height = height;
  spec.rho = rho;
  spec.subjects_per_group = subjects_per_group;
  spec.validate();
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  using nlohmann::json;
  ExperimentConfig cfg;
  try {
    const json doc = json::parse(json_text);
    if (!doc.is_object()) throw ConfigError("experiment config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (key == "name") {
        cfg.name = value.get<std::string>();
      } else if (key == "model") {
        cfg.model = parse_model(value.get<std::string>());
      } else if (key == "errors" || key == "error") {
        cfg.errors.clear();
        if (value.is_string()) {
          for (auto part : text::split(value.get<std::string>(), ','))
            cfg.errors.push_back(parse_error_kind(text::trim(part)));
        } else {
          for (const auto& e : value) cfg.errors.push_back(parse_error_kind(e.get<std::string>()));
        }
      } else if (key == "sigmas") {
        cfg.sigmas = value.get<std::vector<double>>();
      } else if (key == "width") {
        cfg.width = value.get<std::size_t>();
      } else if (key == "height") {
        cfg.height = value.get<std::size_t>();
      } else if (key == "subjects_per_group") {
        cfg.subjects_per_group = value.get<std::size_t>();
      } else if (key == "rho") {
        cfg.rho = value.get<double>();
      } else if (key == "replicates") {
        cfg.replicates = value.get<std::size_t>();
      } else if (key == "permutations") {
        cfg.permutations = value.get<std::size_t>();
      } else if (key == "alpha") {
        cfg.alpha = value.get<double>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "methods") {
        if (value.is_string()) {
          cfg.methods = parse_measure_list(value.get<std::string>());
        } else {
          cfg.methods.clear();
          for (const auto& m : value) cfg.methods.push_back(parse_measure_kind(m.get<std::string>()));
        }
      } else {
        throw ConfigError("unknown experiment config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

ExperimentConfig experiment_preset(const std::string& name) {
  constexpr std::string_view prefix = "table-";
  if (name.rfind(prefix, 0) != 0 || name.size() < prefix.size() + 3)
    throw ConfigError("unknown preset '" + name + "' (expected table-<model><error>)");
  const std::string body = name.substr(prefix.size());
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.model = parse_model(body.substr(0, body.size() - 1));
  cfg.errors = {parse_error_kind(body.substr(body.size() - 1))};
  if (cfg.model == Model::M0) {
    cfg.sigmas = {kStudySigmas[0]};
    cfg.replicates = 400;
  } else {
    cfg.sigmas.assign(kStudySigmas.begin(), kStudySigmas.end());
    cfg.replicates = 200;
  }
  cfg.validate();
  return cfg;
}

std::string format_rate_table(const std::vector<ExperimentReport>& reports) {
  if (reports.empty()) return {};
  std::ostringstream out;
  out << "method";
  for (const auto& r : reports) out << ',' << text::format_double(r.spec.sigma);
  out << '\n';
  for (auto kind : reports.front().methods) {
    out << to_string(kind);
    for (const auto& r : reports) {
      const auto it = r.rates.find(kind);
      out << ',';
      if (it != r.rates.end()) out << text::format_double(it->second);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace permglm
