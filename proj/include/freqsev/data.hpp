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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "freqsev/loss.hpp"
#include "json.hpp"

namespace freqsev {

enum class FeatureKind { Continuous, Categorical };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  // Categorical only; a value is stored as its index in this list.
  std::vector<std::string> levels;

  std::optional<std::uint32_t> level_index(std::string_view level) const;
  bool categorical() const noexcept { return kind == FeatureKind::Categorical; }
  bool operator==(const FeatureSpec&) const = default;
};

class Schema {
 public:
  Schema() = default;
  // Throws DataError on duplicate or reserved names.
  explicit Schema(std::vector<FeatureSpec> features);

  std::size_t size() const noexcept { return features_.size(); }
  bool empty() const noexcept { return features_.empty(); }
  const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
  std::span<const FeatureSpec> features() const noexcept { return features_; }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws UsageError naming the missing feature.
  std::size_t index_of(std::string_view name) const;

  // Text cell -> stored value. Throws DataError on an unparseable number or
  // an unknown categorical level.
  double encode(std::size_t feature, std::string_view cell) const;
  std::string decode(std::size_t feature, double value) const;

  // Rating factors of a motor third-party liability portfolio:
  // coverage, fuel, sex, use, fleet (categorical); ageph, power, agec, bm,
  // long, lat (continuous).
  static Schema mtpl();

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& j);

  bool operator==(const Schema&) const = default;

 private:
  std::vector<FeatureSpec> features_;
};

struct PolicyRecord {
  std::string id;
  double expo = 1.0;
  std::int64_t nclaims = 0;
  double amount = 0.0;
  std::vector<double> features;  // encoded per Schema
};

class Portfolio {
 public:
  Portfolio() = default;
  // Validates every record; throws DataError naming the first bad record.
  Portfolio(Schema schema, std::vector<PolicyRecord> records);

  const Schema& schema() const noexcept { return schema_; }
  std::span<const PolicyRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const PolicyRecord& operator[](std::size_t i) const { return records_[i]; }

 private:
  Schema schema_;
  std::vector<PolicyRecord> records_;
};

// Reads id,expo,nclaims,amount plus every schema feature column (any column
// order, extra columns ignored). Categorical features declared without
// levels take the sorted set of observed values. Exposure above one is capped
// at one.
Portfolio read_portfolio(std::istream& in, const Schema& schema);
Portfolio load_portfolio(const std::filesystem::path& path, const Schema& schema);
void write_portfolio(std::ostream& out, const Portfolio& portfolio);

class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

  void append_row(std::span<const double> values);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

FeatureMatrix feature_matrix(const Portfolio& portfolio);

// A learning view of a portfolio. For frequency the response is the claim
// count and the weight the exposure; for severity the response is the
// average claim amount and the weight the claim count.
struct RegressionProblem {
  LossKind loss = LossKind::Poisson;
  Schema schema;
  FeatureMatrix x;
  std::vector<double> response;
  std::vector<double> weight;
  // Portfolio row of each problem row.
  std::vector<std::size_t> source_rows;

  std::size_t size() const noexcept { return response.size(); }

  // Throws DataError when the invariants above do not hold.
  void validate() const;
};

RegressionProblem frequency_view(const Portfolio& portfolio);
RegressionProblem severity_view(const Portfolio& portfolio);

struct FoldAssignment {
  int k = 0;
  std::vector<int> labels;  // 1..k per row

  std::size_t size() const noexcept { return labels.size(); }
  std::vector<std::size_t> rows_in(int fold) const;
  std::vector<std::size_t> rows_not_in(std::initializer_list<int> folds) const;
  // Labels of the given rows, e.g. the portfolio folds of a severity view.
  FoldAssignment restrict(std::span<const std::size_t> rows) const;
};

// Sorts policies on claim frequency N/e, then severity L/N (0 when claim
// free), shuffles ties with the seeded RNG, and deals the sorted policies
// round-robin to folds 1..k.
FoldAssignment stratified_folds(const Portfolio& portfolio, int k, std::uint64_t seed);
// Uniform random assignment with fold sizes differing by at most one.
FoldAssignment random_folds(std::size_t n, int k, std::uint64_t seed);

void write_folds(std::ostream& out, const Portfolio& portfolio, const FoldAssignment& folds);
// Reads id,fold rows and aligns them with the portfolio order.
FoldAssignment read_folds(std::istream& in, const Portfolio& portfolio);

}  // namespace freqsev
