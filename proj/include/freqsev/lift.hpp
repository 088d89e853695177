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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "freqsev/data.hpp"
#include "freqsev/model.hpp"
#include "json.hpp"

namespace freqsev {

// Exposure times predicted frequency times predicted severity. Throws
// std::invalid_argument when the models disagree on the schema.
double technical_premium(const Model& frequency, const Model& severity, std::span<const double> x,
                         double exposure);
std::vector<double> technical_premiums(const Model& frequency, const Model& severity,
                                       const Portfolio& portfolio);
// Each policy priced by the models of its own fold (index fold - 1), i.e.
// the models trained with that fold held out.
std::vector<double> out_of_sample_premiums(const Portfolio& portfolio, const FoldAssignment& folds,
                                           std::span<const Model> frequency,
                                           std::span<const Model> severity);

struct FoldReconciliation {
  int fold = 0;
  double premium = 0.0;
  double loss = 0.0;
  double ratio = 0.0;  // premium / loss
};

std::vector<FoldReconciliation> reconcile(std::span<const double> premiums,
                                          std::span<const double> losses,
                                          const FoldAssignment& folds);

struct TariffComparison {
  std::vector<double> bench;
  std::vector<double> comp;
  std::vector<double> loss;
  std::vector<double> exposure;

  std::size_t size() const noexcept { return bench.size(); }
  double relativity(std::size_t i) const { return comp[i] / bench[i]; }
  // Throws DataError on mismatched lengths, non-positive premiums or
  // exposures, or negative losses.
  void validate() const;
};

// Policies sorted by relativity; ties keep their order in the comparison.
std::vector<std::size_t> relativity_order(const TariffComparison& cmp);

// Start offsets (size B + 1) into `order`. A policy joins the current bin;
// the bin closes once the cumulative exposure reaches b / B of the total.
// Throws DataError when a bin stays empty.
std::vector<std::size_t> equal_exposure_bins(std::span<const double> exposure,
                                             std::span<const std::size_t> order, std::size_t bins);

struct LiftBin {
  std::size_t policies = 0;
  double exposure = 0.0;
  double relativity_min = 0.0;
  double relativity_max = 0.0;
  double relativity_mean = 0.0;
  double loss = 0.0;
  double bench_premium = 0.0;
  double comp_premium = 0.0;
  double loss_ratio = 0.0;     // loss / benchmark premium
  double average_loss = 0.0;   // per policy
  double average_bench = 0.0;
  double average_comp = 0.0;
  // premium / loss - 1; undefined when the bin has no loss.
  bool error_defined = false;
  double bench_error = 0.0;
  double comp_error = 0.0;
};

struct LiftTable {
  std::vector<LiftBin> bins;

  void write_loss_ratio_csv(std::ostream& out) const;
  void write_double_lift_csv(std::ostream& out) const;
};

LiftTable lift_table(const TariffComparison& cmp, std::size_t bins = 5);
LiftTable loss_ratio_lift(const TariffComparison& cmp, std::size_t bins = 5);
LiftTable double_lift(const TariffComparison& cmp, std::size_t bins = 5);

enum class LorenzIntegration { Trapezoid, Step };

struct LorenzPoint {
  double premium_share = 0.0;
  double loss_share = 0.0;
  double relativity = 0.0;  // threshold; 0 at the origin
};

struct LorenzCurve {
  // From (0, 0) to (1, 1), one point per distinct relativity.
  std::vector<LorenzPoint> points;
  // Twice the area between the diagonal and the curve, in percent.
  double gini = 0.0;
  double profit() const noexcept { return gini / 2.0; }

  void write_csv(std::ostream& out) const;
};

// Throws DataError on zero total loss or premium.
LorenzCurve ordered_lorenz(const TariffComparison& cmp,
                           LorenzIntegration integration = LorenzIntegration::Trapezoid);

struct GiniMatrix {
  std::vector<std::string> names;
  // gini[b][c], benchmark b against competitor c; NaN on the diagonal.
  std::vector<std::vector<double>> gini;
  std::vector<double> row_max;
  std::size_t minimax = 0;

  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

GiniMatrix gini_matrix(std::span<const std::string> names,
                       std::span<const std::vector<double>> premiums, std::span<const double> loss,
                       std::span<const double> exposure,
                       LorenzIntegration integration = LorenzIntegration::Trapezoid);

}  // namespace freqsev
