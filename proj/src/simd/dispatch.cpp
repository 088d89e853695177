/*
 * Copyright 2026 The freqsev Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

#include "freqsev/simd/kernels.hpp"

namespace freqsev::simd {

#if defined(FREQSEV_HAVE_AVX2)
const KernelTable& avx2_table_unchecked() noexcept;
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(FREQSEV_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* resolve_default() noexcept {
  if (const char* forced = std::getenv("FREQSEV_SIMD")) {
    if (std::string_view(forced) == "scalar") return &scalar_kernels();
  }
  if (const KernelTable* wide = avx2_kernels()) return wide;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() noexcept {
  static std::atomic<const KernelTable*> slot{resolve_default()};
  return slot;
}

}  // namespace

const KernelTable* avx2_kernels() noexcept {
#if defined(FREQSEV_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2: return avx2_kernels() != nullptr;
  }
  return false;
}

const KernelTable& kernels() noexcept { return *active_slot().load(std::memory_order_acquire); }

Isa active_isa() noexcept { return kernels().isa; }

void select_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("SIMD variant not supported on this CPU: " +
                                std::string(to_string(isa)));
  }
  const KernelTable* table = isa == Isa::Avx2 ? avx2_kernels() : &scalar_kernels();
  active_slot().store(table, std::memory_order_release);
}

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

}  // namespace freqsev::simd
