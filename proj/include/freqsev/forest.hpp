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

// Random forests: bootstrap samples, a fresh draw of split candidates at
// every node, unpruned deviance trees, response-scale averaging.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "freqsev/tree.hpp"
#include "json.hpp"

namespace freqsev {

struct ForestParams {
  std::size_t trees = 100;
  std::size_t mtry = 1;
  // Bootstrap size as a fraction of the training rows, rounded half-to-even.
  double delta = 0.75;
  double cp = 0.0;
  double kappa = 0.01;
  // Poisson node-rate prior; empty disables it. Ignored for gamma.
  std::optional<double> shrinkage_cv = 0.25;
  std::uint64_t seed = 0;
  // Off: every tree is grown on the training rows as given (testing aid).
  bool bootstrap = true;

  // Throws std::invalid_argument.
  void validate(std::size_t features) const;
  nlohmann::json to_json() const;
  static ForestParams from_json(const nlohmann::json& j);
};

class Forest {
 public:
  Forest() = default;
  Forest(ForestParams params, std::vector<Tree> trees, std::vector<std::uint64_t> tree_seeds);

  const ForestParams& params() const noexcept { return params_; }
  std::span<const Tree> trees() const noexcept { return trees_; }
  std::span<const std::uint64_t> tree_seeds() const noexcept { return seeds_; }
  std::size_t size() const noexcept { return trees_.size(); }
  LossKind loss() const { return trees_.front().loss(); }
  const Schema& schema() const { return trees_.front().schema(); }

  // Mean of the first `trees` member predictions, summed in tree order.
  double predict(std::span<const double> x) const { return predict_prefix(x, trees_.size()); }
  double predict_prefix(std::span<const double> x, std::size_t trees) const;
  std::vector<double> predict(const FeatureMatrix& x) const;
  // Predictions of the forests made of the first T trees for each T in
  // `sizes` (ascending): result[s][i].
  std::vector<std::vector<double>> predict_nested(const FeatureMatrix& x,
                                                  std::span<const std::size_t> sizes,
                                                  std::span<const std::size_t> rows = {}) const;

  nlohmann::json to_json() const;
  static Forest from_json(const nlohmann::json& j, const Schema& schema);

 private:
  ForestParams params_;
  std::vector<Tree> trees_;
  std::vector<std::uint64_t> seeds_;
};

// Fits on `rows` of the problem (all rows when empty). Trees are grown on up
// to `threads` workers; the result does not depend on the thread count.
Forest fit_forest(const TreeGrower& grower, const RegressionProblem& problem,
                  std::span<const std::uint32_t> rows, const ForestParams& params,
                  std::size_t threads = 1);
Forest fit_forest(const RegressionProblem& problem, const ForestParams& params,
                  std::size_t threads = 1);

}  // namespace freqsev
