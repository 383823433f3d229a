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

#include "permglm/results_io.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "permglm/error.hpp"
#include "text_util.hpp"

namespace permglm {
namespace {

using nlohmann::json;

std::string artifact_name(const std::filesystem::path& json_path, MeasureKind kind,
                          std::string_view suffix) {
  return json_path.stem().string() + "_" + std::string(to_string(kind)) + "_" +
         std::string(suffix) + ".csv";
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::size_t id_at(const std::vector<std::size_t>& ids, std::size_t r) {
  return r < ids.size() ? ids[r] : r;
}

void read_envelope_csv(const std::filesystem::path& path, GlobalEnvelope& env) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(text::trim(line), ',');
    double t0 = 0, up = 0, rej = 0;
    if (fields.size() != 4 || !text::parse_double(fields[1], t0) ||
        !text::parse_double(fields[2], up) || !text::parse_double(fields[3], rej))
      throw ParseError(path.string() + " line " + std::to_string(line_no) + ": malformed row");
    env.observed.push_back(t0);
    env.upper.push_back(up);
    env.rejected.push_back(rej != 0.0 ? 1 : 0);
  }
}

}  // namespace

void write_envelope_csv(const GlobalEnvelope& env, const std::vector<std::size_t>& ids,
                        const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "location_id,T0,T_up,rejected\n";
  for (std::size_t r = 0; r < env.observed.size(); ++r)
    out << id_at(ids, r) << ',' << text::format_double(env.observed[r]) << ','
        << text::format_double(env.upper[r]) << ',' << int(env.rejected[r]) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_rejection_csv(const GlobalEnvelope& env, const std::vector<std::size_t>& ids,
                         const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "location_id,T0,T_up\n";
  for (std::size_t r = 0; r < env.observed.size(); ++r)
    if (env.rejected[r])
      out << id_at(ids, r) << ',' << text::format_double(env.observed[r]) << ','
          << text::format_double(env.upper[r]) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_envelope_grids(const GlobalEnvelope& env, std::size_t width, std::size_t height,
                          const std::filesystem::path& prefix) {
  if (width * height != env.observed.size())
    throw ConsistencyError("grid shape does not match the envelope length");
  auto dump = [&](const std::string& suffix, auto value) {
    const std::filesystem::path path = prefix.string() + suffix;
    auto out = open_output(path);
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        if (x) out << ',';
        out << value(y * width + x);
      }
      out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  };
  dump("_T0.csv", [&](std::size_t r) { return text::format_double(env.observed[r]); });
  dump("_Tup.csv", [&](std::size_t r) { return text::format_double(env.upper[r]); });
  dump("_rejected.csv", [&](std::size_t r) { return std::to_string(int(env.rejected[r])); });
}

void save_results(const TestResult& result, const std::filesystem::path& path) {
  json doc;
  doc["alpha"] = result.alpha;
  doc["n_permutations"] = result.permutations;
  doc["seed"] = result.seed;
  doc["scheme"] = std::string(to_string(result.scheme));
  doc["plan_fingerprint"] = result.plan_fingerprint;
  doc["streaming"] = result.streaming;
  doc["n_locations"] = result.locations;
  doc["degenerate_statistics"] = result.degenerate_statistics;
  doc["location_ids"] = result.location_ids;
  json pvals = json::object();
  json methods = json::array();
  const auto dir = path.parent_path();
  for (const auto& m : result.methods) {
    const auto name = std::string(to_string(m.method));
    pvals[name] = m.p_value;
    json entry;
    entry["method"] = name;
    entry["p_value"] = m.p_value;
    entry["alpha"] = result.alpha;
    entry["critical_measure"] = m.critical_measure;
    entry["n_permutations"] = result.permutations;
    entry["seed"] = result.seed;
    if (!m.envelope.observed.empty()) {
      const auto env_name = artifact_name(path, m.method, "envelope");
      const auto rej_name = artifact_name(path, m.method, "rejections");
      write_envelope_csv(m.envelope, result.location_ids, dir / env_name);
      write_rejection_csv(m.envelope, result.location_ids, dir / rej_name);
      entry["envelope_csv"] = env_name;
      entry["rejection_csv"] = rej_name;
      entry["rejection_count"] = m.envelope.rejection_count();
    } else {
      entry["envelope_csv"] = nullptr;
      entry["rejection_csv"] = nullptr;
      entry["rejection_count"] = 0;
    }
    entry["measure_values"] = m.measure.values;
    methods.push_back(std::move(entry));
  }
  doc["p_values"] = std::move(pvals);
  doc["methods"] = std::move(methods);
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

TestResult load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  TestResult result;
  try {
    result.alpha = doc.at("alpha").get<double>();
    result.permutations = doc.at("n_permutations").get<std::size_t>();
    result.seed = doc.at("seed").get<std::uint64_t>();
    result.scheme = parse_scheme(doc.at("scheme").get<std::string>());
    result.plan_fingerprint = doc.at("plan_fingerprint").get<std::uint64_t>();
    result.streaming = doc.at("streaming").get<bool>();
    result.locations = doc.at("n_locations").get<std::size_t>();
    result.degenerate_statistics = doc.value("degenerate_statistics", std::size_t{0});
    result.location_ids = doc.at("location_ids").get<std::vector<std::size_t>>();
    for (const auto& entry : doc.at("methods")) {
      MethodResult m;
      m.method = parse_measure_kind(entry.at("method").get<std::string>());
      m.p_value = entry.at("p_value").get<double>();
      m.critical_measure = entry.at("critical_measure").get<double>();
      m.measure.kind = m.method;
      m.measure.values = entry.at("measure_values").get<std::vector<double>>();
      m.envelope.method = m.method;
      m.envelope.alpha = entry.at("alpha").get<double>();
      m.envelope.p_value = m.p_value;
      m.envelope.critical_measure = m.critical_measure;
      const auto& env_csv = entry.at("envelope_csv");
      if (env_csv.is_string()) {
        const auto csv = path.parent_path() / env_csv.get<std::string>();
        if (std::filesystem::exists(csv)) read_envelope_csv(csv, m.envelope);
      }
      result.methods.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return result;
}

}  // namespace permglm
