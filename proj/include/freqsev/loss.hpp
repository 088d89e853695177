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

// Deviance losses for claim counts (Poisson, exposure-aware) and claim
// severities (gamma, case-weighted), their link-scale gradients, and the
// closed-form constants that minimize them over a node.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace freqsev {

enum class LossKind { Poisson, Gamma, SquaredError };

std::string_view to_string(LossKind kind) noexcept;
// Throws UsageError for unknown names.
LossKind parse_loss_kind(std::string_view name);

namespace loss {

// Gamma-prior shrinkage of Poisson node rates towards the root rate.
// `cv` is the coefficient of variation of the prior; an empty `cv` means
// shrinkage is disabled (the infinite-cv limit, plain sum(N)/sum(e)).
struct NodeShrinkage {
  std::optional<double> cv;
  double root_rate = 0.0;

  static NodeShrinkage disabled() { return {}; }
  static NodeShrinkage with_cv(double cv, double root_rate) { return {cv, root_rate}; }
  bool enabled() const noexcept { return cv.has_value(); }
};

// Mean of observation i is e[i] * mu[i]. Throws std::invalid_argument on
// length mismatch, negative y, or non-positive mu / e.
double poisson_deviance(std::span<const double> y, std::span<const double> mu,
                        std::span<const double> e);

// Case weights w take the place of the gamma shape parameter.
double gamma_deviance(std::span<const double> y, std::span<const double> mu,
                      std::span<const double> w);

double squared_error(std::span<const double> y, std::span<const double> mu,
                     std::span<const double> w);

// Dispatches on kind; for Poisson `w` is the exposure.
double deviance(LossKind kind, std::span<const double> y, std::span<const double> mu,
                std::span<const double> w);

double poisson_node_estimate(double claims, double exposure, const NodeShrinkage& shrinkage);
double poisson_node_estimate(std::span<const double> claims, std::span<const double> exposure,
                             const NodeShrinkage& shrinkage);

// sum(response * w) / sum(w), i.e. total loss over total claim count.
double gamma_node_estimate(std::span<const double> response, std::span<const double> w);

// -dL/df of the half deviance at link score f (log link for Poisson and
// gamma, identity for squared error).
void negative_gradient(LossKind kind, std::span<const double> y, std::span<const double> w,
                       std::span<const double> f, std::span<double> out);
std::vector<double> negative_gradient(LossKind kind, std::span<const double> y,
                                      std::span<const double> w, std::span<const double> f);

}  // namespace loss
}  // namespace freqsev
