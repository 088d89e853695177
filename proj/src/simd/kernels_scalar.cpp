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

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "freqsev/simd/kernels.hpp"

namespace freqsev::simd {
namespace {

double sum_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double poisson_deviance_scalar(const double* y, const double* mu, const double* e,
                               std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = e[i] * mu[i];
    const double log_term = y[i] > 0.0 ? y[i] * std::log(y[i] / mean) : 0.0;
    s += log_term - (y[i] - mean);
  }
  return 2.0 * s;
}

double gamma_deviance_scalar(const double* y, const double* mu, const double* w,
                             std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ratio = y[i] / mu[i];
    s += w[i] * ((y[i] - mu[i]) / mu[i] - std::log(ratio));
  }
  return 2.0 * s;
}

void exp_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void poisson_gradient_scalar(const double* y, const double* e, const double* f, double* out,
                             std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = y[i] - e[i] * std::exp(f[i]);
}

void gamma_gradient_scalar(const double* y, const double* w, const double* f, double* out,
                           std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = w[i] * (y[i] * std::exp(-f[i]) - 1.0);
}

void add_gathered_scalar(double* f, const std::uint32_t* index, const double* table,
                         std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) f[i] += table[index[i]];
}

constexpr KernelTable kScalarTable{
    Isa::Scalar,          "scalar",
    sum_scalar,           dot_scalar,
    poisson_deviance_scalar, gamma_deviance_scalar,
    exp_scalar,           poisson_gradient_scalar,
    gamma_gradient_scalar, add_gathered_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalarTable; }

}  // namespace freqsev::simd
