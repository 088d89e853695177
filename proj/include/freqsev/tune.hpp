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
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "freqsev/data.hpp"
#include "freqsev/forest.hpp"
#include "freqsev/gbm.hpp"
#include "freqsev/model.hpp"
#include "freqsev/tree.hpp"
#include "json.hpp"

namespace freqsev {

// One combination of tuning parameters. Fields outside the model class are
// unused.
struct GridPoint {
  double cp = 0.0;                     // tree
  std::optional<double> shrinkage_cv;  // tree, Poisson only
  std::size_t trees = 0;               // forest, gbm
  std::size_t mtry = 0;                // forest
  int depth = 0;                       // gbm

  nlohmann::json to_json(ModelClass model_class) const;
  bool operator==(const GridPoint&) const = default;
};

struct TuningGrid {
  ModelClass model_class = ModelClass::Tree;
  // Tree axes.
  std::vector<double> cp;
  std::vector<double> shrinkage_cv;  // empty disables shrinkage
  // Ensemble axes.
  std::vector<std::size_t> trees;
  std::vector<std::size_t> mtry;  // forest
  std::vector<int> depth;         // gbm
  // Fixed hyper-parameters. Axis fields and seeds are overridden.
  TreeParams tree;
  ForestParams forest;
  GbmParams gbm;

  // Throws std::invalid_argument.
  void validate(LossKind loss, std::size_t features) const;
  // Cartesian product, first axis outermost.
  std::vector<GridPoint> points() const;

  TreeParams tree_params(LossKind loss, const GridPoint& p) const;
  ForestParams forest_params(const GridPoint& p, std::uint64_t seed) const;
  GbmParams gbm_params(const GridPoint& p, std::uint64_t seed) const;
  Model fit(const TreeGrower& grower, const RegressionProblem& problem,
            std::span<const std::uint32_t> rows, const GridPoint& p, std::uint64_t seed,
            std::size_t threads = 1) const;

  // cp over 1.0..9.9 x 1e-5..1e-3 plus 1e-2; cv over 2^-6..2^0 for Poisson
  // trees; T over 100..5000 by 100; m over 1..min(11, p); d over 1..10.
  static TuningGrid defaults(ModelClass model_class, LossKind loss, std::size_t features);

  nlohmann::json to_json() const;
  // Missing keys keep the defaults of the class.
  static TuningGrid from_json(const nlohmann::json& j, LossKind loss, std::size_t features);
};

// Mantissas 1.0, 1.1, ..., 9.9 over the decades 10^lo .. 10^(hi-1), then 10^hi.
std::vector<double> cp_mantissa_grid(int lo_exponent = -5, int hi_exponent = -2);

// Deviance over the rows divided by their count; Poisson means are
// exposure times the predicted rate. A zero mean against a claim scores
// infinity instead of throwing.
double mean_deviance(const RegressionProblem& problem, std::span<const std::size_t> rows,
                     std::span<const double> prediction);

// Errors on `eval` of every grid point trained on `train`, one fit per
// group of points that differ only in cp (tree) or T (ensembles).
std::vector<double> evaluate_grid(const TreeGrower& grower, const RegressionProblem& problem,
                                  std::span<const std::uint32_t> train,
                                  std::span<const std::size_t> eval, const TuningGrid& grid,
                                  std::span<const GridPoint> points, std::uint64_t seed);

struct ValidationRecord {
  int test_fold = 0;
  std::size_t point = 0;
  int validation_fold = 0;
  double error = 0.0;
};

struct FoldResult {
  int fold = 0;
  std::size_t winner = 0;
  std::vector<double> validation_error;  // per grid point
  double test_error = 0.0;
  std::size_t test_rows = 0;
};

struct CvReport {
  ModelClass model_class = ModelClass::Tree;
  LossKind loss = LossKind::Poisson;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<GridPoint> points;
  std::vector<FoldResult> folds;
  // Ordered by test fold, grid point, validation fold.
  std::vector<ValidationRecord> records;
  // Winner refit per test fold, present when requested.
  std::vector<Model> models;

  // test_fold,point,<axes>,validation_fold,error
  void write_csv(std::ostream& out) const;
  // Winners and test errors per fold.
  nlohmann::json summary() const;
};

struct CvOptions {
  std::size_t threads = 1;
  bool keep_models = false;
};

// For every test fold k and grid point, trains on the data without folds k
// and l for each l != k and averages the errors on fold l; the lowest mean
// wins, ties going to the simpler point (larger cp, fewer trees, shallower
// trees, then grid order). The winner is refit without fold k and scored
// on it. Seeds depend on (k, l) only, so points sharing a fit share draws.
CvReport run_cv(const RegressionProblem& problem, const FoldAssignment& folds,
                const TuningGrid& grid, std::uint64_t seed, const CvOptions& options = {});

// Seed used for the fit trained without folds k and l; l = 0 is the refit.
std::uint64_t cv_fit_seed(std::uint64_t seed, int k, int l);

}  // namespace freqsev
