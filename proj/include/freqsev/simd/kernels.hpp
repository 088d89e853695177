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

#pragma once

// Data-parallel inner loops shared by the loss functions and the boosting
// driver. Every kernel has a scalar reference implementation; wider variants
// are selected once at startup from the CPU feature set and must agree with
// the reference to within rounding (see tests/simd_kernels_test.cpp).
//
// Set FREQSEV_SIMD=scalar in the environment to force the reference path.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace freqsev::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;

  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);

  // 2 * sum[y ln(y / (e mu)) - (y - e mu)], with 0 ln 0 := 0.
  double (*poisson_deviance)(const double* y, const double* mu, const double* e,
                             std::size_t n);
  // 2 * sum w [(y - mu) / mu - ln(y / mu)].
  double (*gamma_deviance)(const double* y, const double* mu, const double* w,
                           std::size_t n);

  void (*exp)(const double* x, double* out, std::size_t n);
  // out = y - e exp(f)
  void (*poisson_gradient)(const double* y, const double* e, const double* f, double* out,
                           std::size_t n);
  // out = w (y exp(-f) - 1)
  void (*gamma_gradient)(const double* y, const double* w, const double* f, double* out,
                         std::size_t n);
  // f[i] += table[index[i]]
  void (*add_gathered)(double* f, const std::uint32_t* index, const double* table,
                       std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;
// nullptr when the running CPU (or the build) lacks AVX2+FMA.
const KernelTable* avx2_kernels() noexcept;

bool isa_supported(Isa isa) noexcept;

// Active table; resolved on first use.
const KernelTable& kernels() noexcept;
Isa active_isa() noexcept;
// Throws std::invalid_argument if the ISA is not supported here.
void select_isa(Isa isa);

std::string_view to_string(Isa isa) noexcept;

}  // namespace freqsev::simd
