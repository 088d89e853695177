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

// Stochastic gradient boosting on the log-link scale. Each stage fits a
// depth-limited squared-error tree to the pseudo-residuals of a subsample
// and replaces its leaf values by shrunken line-search steps.

#include <cstdint>
#include <span>
#include <vector>

#include "freqsev/tree.hpp"
#include "json.hpp"

namespace freqsev {

struct GbmParams {
  std::size_t trees = 100;
  int depth = 1;
  double shrinkage = 0.01;
  // Subsample fraction drawn without replacement each iteration.
  double delta = 0.75;
  double kappa = 0.01;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument.
  void validate() const;
  nlohmann::json to_json() const;
  static GbmParams from_json(const nlohmann::json& j);
};

class Gbm {
 public:
  Gbm() = default;
  Gbm(LossKind loss, Schema schema, GbmParams params, double f0, std::vector<Tree> stages,
      std::vector<double> trace, std::size_t warnings = 0);

  LossKind loss() const noexcept { return loss_; }
  const Schema& schema() const noexcept { return schema_; }
  const GbmParams& params() const noexcept { return params_; }
  double f0() const noexcept { return f0_; }
  std::span<const Tree> stages() const noexcept { return stages_; }
  std::size_t size() const noexcept { return stages_.size(); }
  // Training deviance before the first stage and after each one.
  std::span<const double> staged_deviance() const noexcept { return trace_; }
  // Leaves whose line search had no information and stepped by zero.
  std::size_t warnings() const noexcept { return warnings_; }

  double link(std::span<const double> x) const { return link_prefix(x, stages_.size()); }
  double link_prefix(std::span<const double> x, std::size_t stages) const;
  double predict(std::span<const double> x) const;
  double predict_prefix(std::span<const double> x, std::size_t stages) const;
  std::vector<double> predict(const FeatureMatrix& x) const;
  // Response-scale predictions after each stage count in `sizes`
  // (ascending): result[s][i].
  std::vector<std::vector<double>> predict_nested(const FeatureMatrix& x,
                                                  std::span<const std::size_t> sizes,
                                                  std::span<const std::size_t> rows = {}) const;

  nlohmann::json to_json() const;
  static Gbm from_json(const nlohmann::json& j, const Schema& schema);

 private:
  LossKind loss_ = LossKind::Poisson;
  Schema schema_;
  GbmParams params_;
  double f0_ = 0.0;
  std::vector<Tree> stages_;
  std::vector<double> trace_;
  std::size_t warnings_ = 0;
};

// Fits on `rows` of the problem (all rows when empty). Poisson or gamma only.
Gbm fit_gbm(const TreeGrower& grower, const RegressionProblem& problem,
            std::span<const std::uint32_t> rows, const GbmParams& params);
Gbm fit_gbm(const RegressionProblem& problem, const GbmParams& params);

}  // namespace freqsev
