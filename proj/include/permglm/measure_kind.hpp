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

#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace permglm {

/// The five multiple-testing corrections.
enum class MeasureKind { fmax, pmin, erl, cont, area };

inline constexpr std::array<MeasureKind, 5> kAllMeasures = {
    MeasureKind::fmax, MeasureKind::pmin, MeasureKind::erl, MeasureKind::cont, MeasureKind::area};

std::string_view to_string(MeasureKind kind);

/// Parses "fmax", "pmin", "erl", "cont" or "area". Throws ConfigError otherwise.
MeasureKind parse_measure_kind(std::string_view name);

/// Parses a comma-separated list, e.g. "fmax,erl". Duplicates are dropped,
/// order of first appearance kept.
std::vector<MeasureKind> parse_measure_list(std::string_view list);

/// F-max is the only measure where larger values are more extreme.
constexpr bool larger_is_extreme(MeasureKind kind) { return kind == MeasureKind::fmax; }

/// Small bitset over MeasureKind.
class MeasureSet {
 public:
  MeasureSet() = default;
  MeasureSet(std::initializer_list<MeasureKind> kinds) {
    for (auto k : kinds) insert(k);
  }
  template <typename Range>
  static MeasureSet from(const Range& kinds) {
    MeasureSet s;
    for (auto k : kinds) s.insert(k);
    return s;
  }
  static MeasureSet all() { return from(kAllMeasures); }

  void insert(MeasureKind k) { bits_ |= bit(k); }
  bool contains(MeasureKind k) const { return (bits_ & bit(k)) != 0; }
  bool empty() const { return bits_ == 0; }
  bool needs_ordinary_ranks() const {
    return contains(MeasureKind::pmin) || contains(MeasureKind::erl);
  }
  bool needs_continuous_ranks() const {
    return contains(MeasureKind::cont) || contains(MeasureKind::area);
  }
  std::vector<MeasureKind> kinds() const {
    std::vector<MeasureKind> out;
    for (auto k : kAllMeasures)
      if (contains(k)) out.push_back(k);
    return out;
  }
  friend bool operator==(MeasureSet, MeasureSet) = default;

 private:
  static unsigned bit(MeasureKind k) { return 1u << static_cast<unsigned>(k); }
  unsigned bits_ = 0;
};

}  // namespace permglm
