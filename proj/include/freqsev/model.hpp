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

#include <filesystem>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "freqsev/forest.hpp"
#include "freqsev/gbm.hpp"
#include "freqsev/tree.hpp"
#include "json.hpp"

namespace freqsev {

enum class ModelClass { Tree, Forest, Gbm };

std::string_view to_string(ModelClass kind) noexcept;
// Throws UsageError.
ModelClass parse_model_class(std::string_view name);

// Any fitted learner behind one prediction interface.
class Model {
 public:
  Model() = default;
  Model(Tree tree) : impl_(std::move(tree)) {}      // NOLINT
  Model(Forest forest) : impl_(std::move(forest)) {}  // NOLINT
  Model(Gbm gbm) : impl_(std::move(gbm)) {}         // NOLINT

  ModelClass model_class() const noexcept { return static_cast<ModelClass>(impl_.index()); }
  LossKind loss() const;
  const Schema& schema() const;

  const Tree* tree() const noexcept { return std::get_if<Tree>(&impl_); }
  const Forest* forest() const noexcept { return std::get_if<Forest>(&impl_); }
  const Gbm* gbm() const noexcept { return std::get_if<Gbm>(&impl_); }

  // Response scale: claim rate per unit exposure or mean severity.
  double predict(std::span<const double> x) const;
  // Log of the response for Poisson and gamma, the response otherwise.
  double predict_link(std::span<const double> x) const;
  std::vector<double> predict(const FeatureMatrix& x) const;

  // Raw split improvements per feature; ensembles average over members.
  std::vector<double> importance() const;

  // Self-contained document carrying the schema.
  nlohmann::json to_json() const;
  static Model from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  // Throws DataError on an unreadable or malformed file.
  static Model load(const std::filesystem::path& path);

 private:
  std::variant<Tree, Forest, Gbm> impl_;
};

}  // namespace freqsev
