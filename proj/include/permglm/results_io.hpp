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

#include <filesystem>

#include "permglm/pipeline.hpp"

namespace permglm {

/// Writes `path` (JSON) plus, per method with an envelope,
/// `<stem>_<method>_envelope.csv` (location_id,T0,T_up,rejected) and
/// `<stem>_<method>_rejections.csv` (rejected locations only) next to it.
/// Doubles are written in shortest round-trip form.
void save_results(const TestResult& result, const std::filesystem::path& path);

/// Reads a results JSON and, when present, its envelope CSVs.
TestResult load_results(const std::filesystem::path& path);

/// location_id,T0,T_up,rejected
void write_envelope_csv(const GlobalEnvelope& envelope, const std::vector<std::size_t>& ids,
                        const std::filesystem::path& path);
void write_rejection_csv(const GlobalEnvelope& envelope, const std::vector<std::size_t>& ids,
                         const std::filesystem::path& path);

/// T0, T_up and the rejection mask as three height x width CSV matrices
/// (`<prefix>_T0.csv`, `<prefix>_Tup.csv`, `<prefix>_rejected.csv`).
void write_envelope_grids(const GlobalEnvelope& envelope, std::size_t width, std::size_t height,
                          const std::filesystem::path& prefix);

}  // namespace permglm
