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

// CART regression trees under Poisson, gamma or squared-error deviance.
// Growth is gated by a complexity parameter relative to the root loss and
// stopped by a minimum node share; there is no pruning pass.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "freqsev/data.hpp"
#include "freqsev/loss.hpp"
#include "freqsev/rng.hpp"
#include "json.hpp"

namespace freqsev {

struct TreeParams {
  LossKind loss = LossKind::Poisson;
  // A split is kept only if its improvement exceeds cp times the root loss.
  double cp = 0.0;
  // Both children of a split need at least kappa * n rows, n being the
  // number of rows the tree is grown on.
  double kappa = 0.01;
  // Number of split levels below the root; a stump has depth 1.
  std::optional<int> max_depth;
  // Coefficient of variation of the gamma prior on Poisson node rates.
  // Empty disables shrinkage.
  std::optional<double> shrinkage_cv;
  // Split candidates drawn per node without replacement; 0 means all.
  std::size_t mtry = 0;

  // Throws std::invalid_argument.
  void validate(std::size_t features) const;
};

struct TreeNode {
  static constexpr std::int32_t kNone = -1;

  std::int32_t left = kNone;
  std::int32_t right = kNone;
  std::int32_t feature = kNone;
  // Numeric rule: x <= threshold goes left.
  double threshold = 0.0;
  // Categorical rule: sorted level codes going left; all others go right.
  std::vector<std::uint32_t> left_levels;
  double improvement = 0.0;

  double prediction = 0.0;  // response scale
  double weight = 0.0;      // exposure, claim count or row weight
  std::size_t count = 0;    // training rows, duplicates counted
  double deviance = 0.0;    // node loss at its own prediction

  bool leaf() const noexcept { return left == kNone; }
};

class Tree {
 public:
  Tree() = default;
  // Nodes are in pre-order with the root at index 0. Throws DataError if the
  // structure is not a proper binary tree over the schema.
  Tree(LossKind loss, Schema schema, std::vector<TreeNode> nodes);

  LossKind loss() const noexcept { return loss_; }
  const Schema& schema() const noexcept { return schema_; }
  std::span<const TreeNode> nodes() const noexcept { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  double root_loss() const { return nodes_.front().deviance; }

  // Index into nodes() of the leaf containing x. Throws DataError for a
  // categorical code outside the schema's levels.
  std::size_t leaf_of(std::span<const double> x) const;
  // Node indices from the root down to the leaf of x.
  void path_of(std::span<const double> x, std::vector<std::size_t>& path) const;
  double predict(std::span<const double> x) const { return nodes_[leaf_of(x)].prediction; }
  std::vector<double> predict(const FeatureMatrix& x) const;

  std::size_t leaf_count() const noexcept;
  int depth() const noexcept;
  // Summed split improvements per schema feature.
  std::vector<double> importance() const;

  // Replaces leaf predictions, e.g. with boosting line-search values.
  void set_leaf_values(std::span<const double> values_by_node);

  // Indented listing, one node per line, lossless for doubles.
  std::string to_text() const;
  static Tree from_text(std::string_view text, const Schema& schema);

  nlohmann::json to_json() const;
  static Tree from_json(const nlohmann::json& j, const Schema& schema);

 private:
  std::size_t child(std::size_t node, std::span<const double> x) const;

  LossKind loss_ = LossKind::Poisson;
  Schema schema_;
  std::vector<TreeNode> nodes_;
};

// Rank codes of every feature, built once per feature matrix and shared by
// all trees grown on row subsets of it.
class GrowthIndex {
 public:
  GrowthIndex() = default;
  GrowthIndex(const Schema& schema, const FeatureMatrix& x);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t features() const noexcept { return values_.size(); }
  // Code of row i for feature j: rank among distinct values for numeric
  // features, the level code for categorical ones.
  std::uint32_t code(std::size_t j, std::size_t i) const { return codes_[j][i]; }
  std::span<const std::uint32_t> codes(std::size_t j) const { return codes_[j]; }
  // Distinct sorted values (numeric) or level codes (categorical).
  std::span<const double> values(std::size_t j) const { return values_[j]; }

 private:
  std::size_t rows_ = 0;
  std::vector<std::vector<std::uint32_t>> codes_;
  std::vector<std::vector<double>> values_;
};

// Grows trees on one feature matrix for any response, weight and row
// sample. Rows may repeat (bootstrap samples).
class TreeGrower {
 public:
  TreeGrower(const Schema& schema, const FeatureMatrix& x);
  // Reuses an index built for the same matrix.
  TreeGrower(const Schema& schema, const FeatureMatrix& x, const GrowthIndex& index);

  // `seed` drives the per-node feature draws when params.mtry is set.
  // Throws std::invalid_argument on an empty sample or invalid params.
  Tree grow(std::span<const double> response, std::span<const double> weight,
            std::span<const std::uint32_t> rows, const TreeParams& params,
            std::uint64_t seed = 0) const;

  const GrowthIndex& index() const noexcept { return *index_; }

 private:
  const Schema& schema_;
  const FeatureMatrix& x_;
  std::optional<GrowthIndex> owned_;
  const GrowthIndex* index_;
};

// Grows on every row of the problem with the problem's loss.
Tree grow_tree(const RegressionProblem& problem, TreeParams params);

// Levels ordered ascending by their empirical response average (claims
// per exposure for Poisson, total over weight otherwise), ties by name.
// `codes` holds the level code of every row. Throws std::invalid_argument if
// a level has no rows.
std::vector<std::string> order_categorical_levels(LossKind loss, std::span<const std::string> levels,
                                                  std::span<const std::uint32_t> codes,
                                                  std::span<const double> y,
                                                  std::span<const double> w);

}  // namespace freqsev
