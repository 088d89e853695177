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

// Compiled with -mavx2 -mfma. Only reached through dispatch.cpp after the
// CPU check, never called directly.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "freqsev/simd/kernels.hpp"

namespace freqsev::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

// Cephes-style double exp. Valid for x in [-708, 709]; inputs are clamped to
// that range so the result stays a normal double.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125E-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212E-6);
  const __m256d input = x;
  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-746.0)), _mm256_set1_pd(710.0));

  const __m256d fx = _mm256_round_pd(_mm256_fmadd_pd(x, log2e, _mm256_set1_pd(0.5)),
                                     _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC);
  x = _mm256_fnmadd_pd(fx, c1, x);
  x = _mm256_fnmadd_pd(fx, c2, x);
  const __m256d xx = _mm256_mul_pd(x, x);

  __m256d px = _mm256_fmadd_pd(_mm256_set1_pd(1.26177193074810590878E-4), xx,
                               _mm256_set1_pd(3.02994407707441961300E-2));
  px = _mm256_fmadd_pd(px, xx, _mm256_set1_pd(9.99999999999999999910E-1));
  px = _mm256_mul_pd(px, x);
  __m256d qx = _mm256_fmadd_pd(_mm256_set1_pd(3.00198505138664455042E-6), xx,
                               _mm256_set1_pd(2.52448340349684104192E-3));
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.27265548208155028766E-1));
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.00000000000000000009E0));

  __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  r = _mm256_fmadd_pd(r, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  // 2^fx as two exponent-field factors so that subnormal results and
  // overflow to inf come out as in std::exp.
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
  const __m256d half = _mm256_floor_pd(_mm256_mul_pd(fx, _mm256_set1_pd(0.5)));
  auto pow2 = [&](__m256d k) {
    const __m256i n = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)),
                                       _mm256_castpd_si256(magic));
    return _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(n, _mm256_set1_epi64x(1023)), 52));
  };
  r = _mm256_mul_pd(_mm256_mul_pd(r, pow2(half)), pow2(_mm256_sub_pd(fx, half)));
  // NaN passes through.
  return _mm256_blendv_pd(r, input, _mm256_cmp_pd(input, input, _CMP_UNORD_Q));
}

// Cephes-style double log for positive normal inputs.
inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_raw = _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7ff));
  const __m256d two52 = _mm256_set1_pd(4503599627370496.0);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(exp_raw, _mm256_castpd_si256(two52))), two52);
  e = _mm256_sub_pd(e, _mm256_set1_pd(1022.0));

  // Mantissa in [0.5, 1).
  __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                      _mm256_set1_epi64x(0x3FE0000000000000LL)));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(small, one));
  m = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(small, m)), one);

  const __m256d z = _mm256_mul_pd(m, m);
  __m256d p = _mm256_fmadd_pd(_mm256_set1_pd(1.01875663804580931796E-4), m,
                              _mm256_set1_pd(4.97494994976747001425E-1));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(4.70579119878881725854E0));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(1.44989225341610930846E1));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(1.79368678507819816313E1));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(7.70838733755885391666E0));
  __m256d q = _mm256_add_pd(m, _mm256_set1_pd(1.12873587189167450590E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(4.52279145837532221105E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(8.29875266912776603211E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(7.11544750618563894466E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(2.31251620126765340583E1));

  __m256d y = _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(z, p), q));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(z, _mm256_set1_pd(0.5), y);
  __m256d result = _mm256_add_pd(m, y);
  return _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), result);
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
  }
  if (i + 4 <= n) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
    i += 4;
  }
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i];
  return s;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  if (i + 4 <= n) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double poisson_deviance_avx2(const double* y, const double* mu, const double* e,
                             std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yv = _mm256_loadu_pd(y + i);
    const __m256d mean = _mm256_mul_pd(_mm256_loadu_pd(e + i), _mm256_loadu_pd(mu + i));
    const __m256d claim_free = _mm256_cmp_pd(yv, zero, _CMP_EQ_OQ);
    const __m256d ratio = _mm256_blendv_pd(_mm256_div_pd(yv, mean), one, claim_free);
    const __m256d term = _mm256_fmsub_pd(yv, log_pd(ratio), _mm256_sub_pd(yv, mean));
    acc = _mm256_add_pd(acc, term);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double mean = e[i] * mu[i];
    const double log_term = y[i] > 0.0 ? y[i] * std::log(y[i] / mean) : 0.0;
    s += log_term - (y[i] - mean);
  }
  return 2.0 * s;
}

double gamma_deviance_avx2(const double* y, const double* mu, const double* w,
                           std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yv = _mm256_loadu_pd(y + i);
    const __m256d mv = _mm256_loadu_pd(mu + i);
    const __m256d rel = _mm256_div_pd(_mm256_sub_pd(yv, mv), mv);
    const __m256d inner = _mm256_sub_pd(rel, log_pd(_mm256_div_pd(yv, mv)));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), inner, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    s += w[i] * ((y[i] - mu[i]) / mu[i] - std::log(y[i] / mu[i]));
  }
  return 2.0 * s;
}

void exp_avx2(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = std::exp(x[i]);
}

void poisson_gradient_avx2(const double* y, const double* e, const double* f, double* out,
                           std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mean = _mm256_mul_pd(_mm256_loadu_pd(e + i), exp_pd(_mm256_loadu_pd(f + i)));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(y + i), mean));
  }
  for (; i < n; ++i) out[i] = y[i] - e[i] * std::exp(f[i]);
}

void gamma_gradient_avx2(const double* y, const double* w, const double* f, double* out,
                         std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d inv = exp_pd(_mm256_xor_pd(_mm256_loadu_pd(f + i), sign));
    const __m256d g = _mm256_fmsub_pd(_mm256_loadu_pd(y + i), inv, one);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(w + i), g));
  }
  for (; i < n; ++i) out[i] = w[i] * (y[i] * std::exp(-f[i]) - 1.0);
}

void add_gathered_avx2(double* f, const std::uint32_t* index, const double* table,
                       std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(index + i));
    const __m256d add = _mm256_i32gather_pd(table, idx, 8);
    _mm256_storeu_pd(f + i, _mm256_add_pd(_mm256_loadu_pd(f + i), add));
  }
  for (; i < n; ++i) f[i] += table[index[i]];
}

constexpr KernelTable kAvx2Table{
    Isa::Avx2,          "avx2",
    sum_avx2,           dot_avx2,
    poisson_deviance_avx2, gamma_deviance_avx2,
    exp_avx2,           poisson_gradient_avx2,
    gamma_gradient_avx2, add_gathered_avx2,
};

}  // namespace

const KernelTable& avx2_table_unchecked() noexcept { return kAvx2Table; }

}  // namespace freqsev::simd
