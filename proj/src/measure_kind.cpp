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

#include "permglm/measure_kind.hpp"

#include <algorithm>
#include <string>

#include "permglm/error.hpp"

namespace permglm {

std::string_view to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::fmax: return "fmax";
    case MeasureKind::pmin: return "pmin";
    case MeasureKind::erl: return "erl";
    case MeasureKind::cont: return "cont";
    case MeasureKind::area: return "area";
  }
  return "unknown";
}

MeasureKind parse_measure_kind(std::string_view name) {
  for (auto kind : kAllMeasures)
    if (to_string(kind) == name) return kind;
  throw ConfigError("unknown method '" + std::string(name) +
                    "' (expected fmax, pmin, erl, cont or area)");
}

std::vector<MeasureKind> parse_measure_list(std::string_view list) {
  std::vector<MeasureKind> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    auto item = list.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      const auto kind = parse_measure_kind(item);
      if (std::find(out.begin(), out.end(), kind) == out.end()) out.push_back(kind);
    }
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("method list is empty");
  return out;
}

}  // namespace permglm
