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

#include <atomic>
#include <cstdlib>
#include <string>

#include "permglm/error.hpp"
#include "permglm/simd/kernels.hpp"

namespace permglm::simd {
namespace {

bool cpu_has_avx2_fma() {
#if defined(PERMGLM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&kernels_for(default_backend())};
  return slot;
}

}  // namespace

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

std::optional<Backend> parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::scalar;
  if (name == "avx2") return Backend::avx2;
  if (name == "neon") return Backend::neon;
  return std::nullopt;
}

bool backend_available(Backend backend) {
  switch (backend) {
    case Backend::scalar: return true;
    case Backend::avx2: return cpu_has_avx2_fma();
    case Backend::neon:
#if defined(PERMGLM_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend default_backend() {
  if (const char* env = std::getenv("PERMGLM_SIMD")) {
    if (auto requested = parse_backend(env); requested && backend_available(*requested))
      return *requested;
  }
  if (backend_available(Backend::avx2)) return Backend::avx2;
  if (backend_available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

const KernelTable& kernels_for(Backend backend) {
  if (!backend_available(backend))
    throw ConfigError("SIMD backend '" + std::string(to_string(backend)) +
                      "' is not available on this machine");
  switch (backend) {
#if defined(PERMGLM_HAVE_AVX2)
    case Backend::avx2: return detail::avx2_table();
#endif
#if defined(PERMGLM_HAVE_NEON)
    case Backend::neon: return detail::neon_table();
#endif
    default: return detail::scalar_table();
  }
}

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_acquire); }

Backend active_backend() {
  const auto name = active_kernels().name;
  return parse_backend(name).value_or(Backend::scalar);
}

void set_backend(Backend backend) {
  active_slot().store(&kernels_for(backend), std::memory_order_release);
}

}  // namespace permglm::simd
