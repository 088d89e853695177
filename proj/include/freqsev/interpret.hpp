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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "freqsev/data.hpp"
#include "freqsev/model.hpp"

namespace freqsev {

enum class Scale { Response, Link };

// Prediction for one feature vector; must be safe to call concurrently.
using Predictor = std::function<double(std::span<const double>)>;

// Borrows the model.
Predictor make_predictor(const Model& model, Scale scale);

struct ImportanceReport {
  std::vector<std::string> features;
  // Percent of the total; all zero when the model has no splits.
  std::vector<double> percent;

  void write_csv(std::ostream& out) const;
};

ImportanceReport variable_importance(const Model& model);
ImportanceReport normalize_importance(const Schema& schema, std::span<const double> raw);

// All distinct observed values when there are at most `max_points`, else
// that many equally spaced quantiles; every level for a categorical feature.
std::vector<double> default_grid(const Schema& schema, const FeatureMatrix& x, std::size_t feature,
                                 std::span<const std::size_t> rows = {},
                                 std::size_t max_points = 100);

// Sorted random subset of 0..n-1 of the given size (all rows if larger).
std::vector<std::size_t> sample_rows(std::size_t n, std::size_t count, std::uint64_t seed);

struct IceBundle {
  std::size_t feature = 0;
  std::vector<double> grid;
  std::vector<std::size_t> observations;  // matrix rows
  std::vector<std::vector<double>> values;  // [observation][grid]
  // Some grid value lies outside the observed range.
  bool extrapolated = false;
};

struct PdCurve {
  std::size_t feature = 0;
  std::vector<double> grid;
  std::vector<double> values;
  bool extrapolated = false;
};

// Prediction at each grid value with the other features of every
// observation kept. Empty `rows` means all rows.
IceBundle ice(const Predictor& f, std::size_t feature, std::span<const double> grid,
              const FeatureMatrix& x, std::span<const std::size_t> rows = {},
              std::size_t threads = 1);
IceBundle ice(const Model& model, std::size_t feature, std::span<const double> grid,
              const FeatureMatrix& x, std::span<const std::size_t> rows = {},
              Scale scale = Scale::Response, std::size_t threads = 1);
// Mean of the ICE curves, summed in observation order.
PdCurve partial_dependence(const IceBundle& ice);
PdCurve partial_dependence(const Model& model, std::size_t feature, std::span<const double> grid,
                           const FeatureMatrix& x, std::span<const std::size_t> rows = {},
                           Scale scale = Scale::Response, std::size_t threads = 1);

struct GroupedCurve {
  std::string label;
  std::size_t rows = 0;
  // Shifted so the first grid value is zero.
  PdCurve curve;
};

// Rows split into q groups of equal size by the group feature (ties by row
// order), or by level for a categorical group feature.
std::vector<GroupedCurve> grouped_partial_dependence(const Model& model, std::size_t feature,
                                                     std::size_t group_feature,
                                                     std::span<const double> grid,
                                                     const FeatureMatrix& x,
                                                     std::span<const std::size_t> rows = {},
                                                     std::size_t q = 5,
                                                     Scale scale = Scale::Response,
                                                     std::size_t threads = 1);

struct HStatistic {
  std::size_t k = 0;
  std::size_t l = 0;
  double h = 0.0;
  // The two-way dependence is flat; h is reported as zero.
  bool degenerate = false;
};

// Share of the centred two-way partial dependence, evaluated at the
// observed points, not explained by the two one-way terms.
HStatistic h_statistic(const Predictor& f, std::size_t k, std::size_t l, const FeatureMatrix& x,
                       std::span<const std::size_t> rows = {}, std::size_t threads = 1);
HStatistic h_statistic(const Model& model, std::size_t k, std::size_t l, const FeatureMatrix& x,
                       std::span<const std::size_t> rows = {}, Scale scale = Scale::Response,
                       std::size_t threads = 1);
// Every pair of the given features (all when empty), one-way terms shared.
std::vector<HStatistic> h_statistics(const Model& model, const FeatureMatrix& x,
                                     std::span<const std::size_t> rows = {},
                                     std::span<const std::size_t> features = {},
                                     Scale scale = Scale::Response, std::size_t threads = 1);

// curve,feature,grid,value with categorical grid values decoded.
void write_pd_csv(std::ostream& out, const Schema& schema, std::span<const PdCurve> curves,
                  std::span<const std::string> names);
// observation,feature,grid,value; observations named by `ids` when given.
void write_ice_csv(std::ostream& out, const Schema& schema, const IceBundle& ice,
                   std::span<const std::string> ids = {});
void write_h_csv(std::ostream& out, const Schema& schema, std::span<const HStatistic> h);

}  // namespace freqsev
