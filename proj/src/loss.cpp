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

#include "freqsev/loss.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "freqsev/error.hpp"
#include "freqsev/simd/kernels.hpp"

namespace freqsev {

std::string_view to_string(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::Poisson: return "poisson";
    case LossKind::Gamma: return "gamma";
    case LossKind::SquaredError: return "squared_error";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "poisson") return LossKind::Poisson;
  if (name == "gamma") return LossKind::Gamma;
  if (name == "squared_error") return LossKind::SquaredError;
  throw UsageError("unknown loss kind: " + std::string(name));
}

namespace loss {
namespace {

void check_lengths(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c) throw std::invalid_argument("deviance: length mismatch");
}

void check_positive(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument(std::string("deviance: non-positive ") + what);
    }
  }
}

}  // namespace

double poisson_deviance(std::span<const double> y, std::span<const double> mu,
                        std::span<const double> e) {
  check_lengths(y.size(), mu.size(), e.size());
  for (double v : y) {
    if (!(v >= 0.0)) throw std::invalid_argument("deviance: negative claim count");
  }
  check_positive(mu, "mu");
  check_positive(e, "exposure");
  return simd::kernels().poisson_deviance(y.data(), mu.data(), e.data(), y.size());
}

double gamma_deviance(std::span<const double> y, std::span<const double> mu,
                      std::span<const double> w) {
  check_lengths(y.size(), mu.size(), w.size());
  check_positive(y, "response");
  check_positive(mu, "mu");
  check_positive(w, "weight");
  return simd::kernels().gamma_deviance(y.data(), mu.data(), w.data(), y.size());
}

double squared_error(std::span<const double> y, std::span<const double> mu,
                     std::span<const double> w) {
  check_lengths(y.size(), mu.size(), w.size());
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - mu[i];
    s += w[i] * r * r;
  }
  return s;
}

double deviance(LossKind kind, std::span<const double> y, std::span<const double> mu,
                std::span<const double> w) {
  switch (kind) {
    case LossKind::Poisson: return poisson_deviance(y, mu, w);
    case LossKind::Gamma: return gamma_deviance(y, mu, w);
    case LossKind::SquaredError: return squared_error(y, mu, w);
  }
  throw std::logic_error("unreachable loss kind");
}

double poisson_node_estimate(double claims, double exposure, const NodeShrinkage& shrinkage) {
  if (!(exposure > 0.0)) throw std::invalid_argument("node estimate: non-positive exposure");
  if (!shrinkage.enabled()) return claims / exposure;
  const double cv = *shrinkage.cv;
  if (!(cv >= 0.0)) throw std::invalid_argument("node estimate: negative prior cv");
  if (!(shrinkage.root_rate > 0.0)) {
    throw std::invalid_argument("node estimate: shrinkage requires a positive root rate");
  }
  if (cv == 0.0) return shrinkage.root_rate;
  const double prior = 1.0 / (cv * cv);
  return (prior + claims) / (prior / shrinkage.root_rate + exposure);
}

double poisson_node_estimate(std::span<const double> claims, std::span<const double> exposure,
                             const NodeShrinkage& shrinkage) {
  if (claims.size() != exposure.size()) {
    throw std::invalid_argument("node estimate: length mismatch");
  }
  double n = 0.0;
  double e = 0.0;
  for (std::size_t i = 0; i < claims.size(); ++i) {
    n += claims[i];
    e += exposure[i];
  }
  return poisson_node_estimate(n, e, shrinkage);
}

double gamma_node_estimate(std::span<const double> response, std::span<const double> w) {
  if (response.size() != w.size()) throw std::invalid_argument("node estimate: length mismatch");
  if (response.empty()) throw std::invalid_argument("node estimate: empty node");
  double total = 0.0;
  double weight = 0.0;
  for (std::size_t i = 0; i < response.size(); ++i) {
    total += response[i] * w[i];
    weight += w[i];
  }
  if (!(weight > 0.0)) throw std::invalid_argument("node estimate: non-positive weight");
  return total / weight;
}

void negative_gradient(LossKind kind, std::span<const double> y, std::span<const double> w,
                       std::span<const double> f, std::span<double> out) {
  if (y.size() != w.size() || y.size() != f.size() || y.size() != out.size()) {
    throw std::invalid_argument("negative_gradient: length mismatch");
  }
  for (double v : f) {
    if (!std::isfinite(v)) throw std::invalid_argument("negative_gradient: non-finite score");
  }
  const auto& k = simd::kernels();
  switch (kind) {
    case LossKind::Poisson:
      k.poisson_gradient(y.data(), w.data(), f.data(), out.data(), y.size());
      return;
    case LossKind::Gamma:
      k.gamma_gradient(y.data(), w.data(), f.data(), out.data(), y.size());
      return;
    case LossKind::SquaredError:
      for (std::size_t i = 0; i < y.size(); ++i) out[i] = w[i] * (y[i] - f[i]);
      return;
  }
}

std::vector<double> negative_gradient(LossKind kind, std::span<const double> y,
                                      std::span<const double> w, std::span<const double> f) {
  std::vector<double> out(y.size());
  negative_gradient(kind, y, w, f, out);
  return out;
}

}  // namespace loss
}  // namespace freqsev
