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

#include "freqsev/tune.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "freqsev/error.hpp"
#include "freqsev/loss.hpp"
#include "freqsev/simulate.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace freqsev {
namespace {

using testing::random_problem;

TuningGrid small_tree_grid() {
  TuningGrid g = TuningGrid::defaults(ModelClass::Tree, LossKind::Poisson, 3);
  g.cp = {1e-3, 1e-2};
  g.shrinkage_cv = {0.25, 1.0};
  g.tree.kappa = 0.05;
  return g;
}

TEST(CpGrid, MantissaDecades) {
  const auto g = cp_mantissa_grid();
  ASSERT_EQ(g.size(), 271u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-5);
  EXPECT_DOUBLE_EQ(g[1], 1.1e-5);
  EXPECT_DOUBLE_EQ(g[89], 9.9e-5);
  EXPECT_DOUBLE_EQ(g[90], 1e-4);
  EXPECT_DOUBLE_EQ(g.back(), 1e-2);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
  EXPECT_THROW(cp_mantissa_grid(-2, -2), std::invalid_argument);
}

TEST(TuningGrid, Defaults) {
  const auto tree = TuningGrid::defaults(ModelClass::Tree, LossKind::Poisson, 11);
  EXPECT_EQ(tree.points().size(), 271u * 7u);
  EXPECT_DOUBLE_EQ(tree.shrinkage_cv.front(), 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(tree.shrinkage_cv.back(), 1.0);
  EXPECT_TRUE(TuningGrid::defaults(ModelClass::Tree, LossKind::Gamma, 11).shrinkage_cv.empty());
  const auto forest = TuningGrid::defaults(ModelClass::Forest, LossKind::Poisson, 11);
  EXPECT_EQ(forest.trees.size(), 50u);
  EXPECT_EQ(forest.trees.back(), 5000u);
  EXPECT_EQ(forest.mtry.size(), 11u);
  EXPECT_DOUBLE_EQ(forest.forest.delta, 0.75);
  EXPECT_DOUBLE_EQ(forest.forest.kappa, 0.01);
  const auto gbm = TuningGrid::defaults(ModelClass::Gbm, LossKind::Poisson, 11);
  EXPECT_EQ(gbm.depth.size(), 10u);
  EXPECT_DOUBLE_EQ(gbm.gbm.shrinkage, 0.01);
  EXPECT_EQ(TuningGrid::defaults(ModelClass::Forest, LossKind::Poisson, 4).mtry.size(), 4u);
  for (const auto& g : {tree, forest, gbm}) EXPECT_NO_THROW(g.validate(LossKind::Poisson, 11));
}

TEST(TuningGrid, PointsOrderFirstAxisOutermost) {
  const auto pts = small_tree_grid().points();
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_EQ(pts[0], (GridPoint{.cp = 1e-3, .shrinkage_cv = 0.25}));
  EXPECT_EQ(pts[1], (GridPoint{.cp = 1e-3, .shrinkage_cv = 1.0}));
  EXPECT_EQ(pts[2], (GridPoint{.cp = 1e-2, .shrinkage_cv = 0.25}));
}

TEST(TuningGrid, ValidationErrors) {
  auto g = small_tree_grid();
  g.cp.clear();
  EXPECT_THROW(g.validate(LossKind::Poisson, 3), std::invalid_argument);
  g = small_tree_grid();
  EXPECT_THROW(g.validate(LossKind::Gamma, 3), std::invalid_argument);
  g.cp = {2.0};
  EXPECT_THROW(g.validate(LossKind::Poisson, 3), std::invalid_argument);
  auto f = TuningGrid::defaults(ModelClass::Forest, LossKind::Poisson, 3);
  f.mtry = {4};
  EXPECT_THROW(f.validate(LossKind::Poisson, 3), std::invalid_argument);
  f.mtry = {1};
  f.trees = {0};
  EXPECT_THROW(f.validate(LossKind::Poisson, 3), std::invalid_argument);
  auto b = TuningGrid::defaults(ModelClass::Gbm, LossKind::Poisson, 3);
  b.depth = {0};
  EXPECT_THROW(b.validate(LossKind::Poisson, 3), std::invalid_argument);
}

TEST(TuningGrid, JsonRoundTrip) {
  for (auto cls : {ModelClass::Tree, ModelClass::Forest, ModelClass::Gbm}) {
    auto g = TuningGrid::defaults(cls, LossKind::Poisson, 5);
    g.trees = {10, 20};
    g.cp = {0.01};
    g.forest.delta = 0.5;
    g.gbm.shrinkage = 0.1;
    const auto back = TuningGrid::from_json(g.to_json(), LossKind::Poisson, 5);
    EXPECT_EQ(back.to_json(), g.to_json());
    EXPECT_EQ(back.points().size(), g.points().size());
  }
  EXPECT_THROW(TuningGrid::from_json({{"model_class", "svm"}}, LossKind::Poisson, 5), UsageError);
}

TEST(MeanDeviance, ZeroMeans) {
  RegressionProblem p = random_problem(LossKind::Poisson, 4, 1, 0, 0, 1);
  p.response = {0, 0, 1, 0};
  const std::vector<std::size_t> rows = {0, 1, 2, 3};
  const std::vector<double> mu = {0.0, 0.1, 0.2, 0.3};
  const double expect = (loss::deviance(LossKind::Poisson, std::vector<double>{0, 1, 0},
                                        std::vector<double>{0.1, 0.2, 0.3},
                                        std::vector<double>{p.weight[1], p.weight[2], p.weight[3]})) /
                        4.0;
  EXPECT_NEAR(mean_deviance(p, rows, mu), expect, 1e-15);
  const std::vector<double> bad = {0.1, 0.1, 0.0, 0.3};
  EXPECT_EQ(mean_deviance(p, rows, bad), std::numeric_limits<double>::infinity());
}

TEST(EvaluateGrid, TreeCpSweepEqualsRefits) {
  const auto p = random_problem(LossKind::Poisson, 600, 2, 1, 4, 7);
  TuningGrid g = TuningGrid::defaults(ModelClass::Tree, LossKind::Poisson, 3);
  g.cp = {0.0, 1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1};
  g.shrinkage_cv = {0.5, 2.0};
  std::vector<std::uint32_t> train;
  std::vector<std::size_t> eval;
  for (std::size_t i = 0; i < p.size(); ++i) (i % 3 == 0 ? eval.push_back(i) : train.push_back(i));
  const TreeGrower grower(p.schema, p.x);
  const auto pts = g.points();
  const auto errors = evaluate_grid(grower, p, train, eval, g, pts, 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Tree t = grower.grow(p.response, p.weight, train, g.tree_params(p.loss, pts[i]));
    std::vector<double> mu;
    for (auto r : eval) mu.push_back(t.predict(p.x.row(r)));
    EXPECT_EQ(errors[i], mean_deviance(p, eval, mu)) << i;
  }
  EXPECT_NE(errors.front(), errors.back());
}

TEST(EvaluateGrid, EnsembleNestingEqualsRefits) {
  const auto p = random_problem(LossKind::Poisson, 500, 2, 1, 3, 9);
  std::vector<std::uint32_t> train;
  std::vector<std::size_t> eval;
  for (std::size_t i = 0; i < p.size(); ++i) (i % 4 == 0 ? eval.push_back(i) : train.push_back(i));
  const TreeGrower grower(p.schema, p.x);
  for (auto cls : {ModelClass::Forest, ModelClass::Gbm}) {
    TuningGrid g = TuningGrid::defaults(cls, LossKind::Poisson, 3);
    g.trees = {3, 7, 12};
    g.mtry = {1, 2};
    g.depth = {1, 2};
    g.gbm.shrinkage = 0.1;
    g.forest.kappa = g.gbm.kappa = 0.05;
    const auto pts = g.points();
    const auto errors = evaluate_grid(grower, p, train, eval, g, pts, 42);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Model m = g.fit(grower, p, train, pts[i], 42);
      std::vector<double> mu;
      for (auto r : eval) mu.push_back(m.predict(p.x.row(r)));
      EXPECT_EQ(errors[i], mean_deviance(p, eval, mu)) << to_string(cls) << ' ' << i;
    }
  }
}

class RunCvTest : public ::testing::Test {
 protected:
  RegressionProblem p = random_problem(LossKind::Poisson, 720, 2, 1, 3, 5);
  FoldAssignment folds = random_folds(720, 6, 11);
};

TEST_F(RunCvTest, EveryRowTestedOnceAndMeansExact) {
  const auto r = run_cv(p, folds, small_tree_grid(), 3);
  ASSERT_EQ(r.folds.size(), 6u);
  std::size_t tested = 0;
  for (const auto& f : r.folds) tested += f.test_rows;
  EXPECT_EQ(tested, p.size());
  std::vector<int> seen(p.size(), 0);
  for (int k = 1; k <= 6; ++k) {
    for (auto i : folds.rows_in(k)) ++seen[i];
  }
  for (int s : seen) EXPECT_EQ(s, 1);

  ASSERT_EQ(r.records.size(), 6u * 5u * r.points.size());
  for (const auto& f : r.folds) {
    for (std::size_t pt = 0; pt < r.points.size(); ++pt) {
      double sum = 0.0;
      std::set<int> ls;
      for (const auto& rec : r.records) {
        if (rec.test_fold == f.fold && rec.point == pt) {
          sum += rec.error;
          ls.insert(rec.validation_fold);
        }
      }
      EXPECT_EQ(ls.size(), 5u);
      EXPECT_FALSE(ls.count(f.fold));
      EXPECT_EQ(f.validation_error[pt], sum / 5.0);
    }
    for (std::size_t pt = 0; pt < r.points.size(); ++pt) {
      EXPECT_LE(f.validation_error[f.winner], f.validation_error[pt]);
    }
  }
}

TEST_F(RunCvTest, SinglePointWinsEverywhere) {
  TuningGrid g = small_tree_grid();
  g.cp = {0.002};
  g.shrinkage_cv = {0.5};
  const auto r = run_cv(p, folds, g, 1);
  for (const auto& f : r.folds) EXPECT_EQ(f.winner, 0u);
}

TEST_F(RunCvTest, DominatingPointWins) {
  TuningGrid g = TuningGrid::defaults(ModelClass::Gbm, LossKind::Poisson, 3);
  g.trees = {1, 60};
  g.depth = {2};
  g.gbm.shrinkage = 0.1;
  g.gbm.kappa = 0.05;
  // Strong signal in x0 so that the longer ensemble dominates.
  RegressionProblem q = p;
  std::mt19937_64 rng(3);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double mean = q.weight[i] * 0.1 * std::exp(0.3 * q.x(i, 0));
    q.response[i] = static_cast<double>(std::poisson_distribution<int>(mean)(rng));
  }
  const auto r = run_cv(q, folds, g, 2);
  for (const auto& f : r.folds) {
    bool a_beats_b = true;
    bool b_beats_a = true;
    for (const auto& rec : r.records) {
      if (rec.test_fold != f.fold || rec.point != 0) continue;
      for (const auto& other : r.records) {
        if (other.test_fold == f.fold && other.point == 1 && other.validation_fold == rec.validation_fold) {
          a_beats_b = a_beats_b && rec.error < other.error;
          b_beats_a = b_beats_a && other.error < rec.error;
        }
      }
    }
    if (a_beats_b) EXPECT_EQ(f.winner, 0u);
    if (b_beats_a) EXPECT_EQ(f.winner, 1u);
    EXPECT_TRUE(a_beats_b || b_beats_a);
  }
}

TEST_F(RunCvTest, TiesGoToSimplerModel) {
  TuningGrid g = small_tree_grid();
  g.cp = {0.5, 0.9};
  g.shrinkage_cv = {0.25};
  const auto r = run_cv(p, folds, g, 1);
  for (const auto& f : r.folds) {
    EXPECT_EQ(f.validation_error[0], f.validation_error[1]);
    EXPECT_EQ(f.winner, 1u);
  }
}

TEST_F(RunCvTest, LoopOracleReproducesWinners) {
  const TuningGrid g = small_tree_grid();
  const auto r = run_cv(p, folds, g, 8);
  const auto oracle = testing::loop_cv_tree(p, folds, g);
  for (std::size_t k = 0; k < 6; ++k) {
    const auto& fold = r.folds[k];
    EXPECT_EQ(fold.winner, oracle[k].winner) << "fold " << k + 1;
    EXPECT_NEAR(fold.test_error, oracle[k].test_error, 1e-12);
    for (std::size_t pt = 0; pt < oracle[k].validation_error.size(); ++pt) {
      EXPECT_NEAR(fold.validation_error[pt], oracle[k].validation_error[pt], 1e-12);
    }
  }
}

TEST_F(RunCvTest, DeterministicAcrossThreads) {
  TuningGrid g = TuningGrid::defaults(ModelClass::Forest, LossKind::Poisson, 3);
  g.trees = {2, 4};
  g.mtry = {1, 3};
  g.forest.kappa = 0.05;
  const auto a = run_cv(p, folds, g, 5, {.threads = 1});
  const auto b = run_cv(p, folds, g, 5, {.threads = 3});
  std::ostringstream sa, sb;
  a.write_csv(sa);
  b.write_csv(sb);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.summary(), b.summary());
  const auto c = run_cv(p, folds, g, 6);
  std::ostringstream sc;
  c.write_csv(sc);
  EXPECT_NE(sa.str(), sc.str());
}

TEST_F(RunCvTest, KeptModelsScoreTheTestFold) {
  TuningGrid g = TuningGrid::defaults(ModelClass::Gbm, LossKind::Poisson, 3);
  g.trees = {5, 10};
  g.depth = {1};
  g.gbm.shrinkage = 0.1;
  const auto r = run_cv(p, folds, g, 5, {.keep_models = true});
  ASSERT_EQ(r.models.size(), 6u);
  for (int k = 1; k <= 6; ++k) {
    const auto& m = r.models[static_cast<std::size_t>(k - 1)];
    const auto& f = r.folds[static_cast<std::size_t>(k - 1)];
    EXPECT_EQ(m.gbm()->size(), r.points[f.winner].trees);
    const auto rows = folds.rows_in(k);
    std::vector<double> mu;
    for (auto i : rows) mu.push_back(m.predict(p.x.row(i)));
    EXPECT_EQ(f.test_error, mean_deviance(p, rows, mu));
  }
  EXPECT_TRUE(run_cv(p, folds, g, 5).models.empty());
}

TEST_F(RunCvTest, CsvAndSummary) {
  const auto r = run_cv(p, folds, small_tree_grid(), 3);
  std::ostringstream out;
  r.write_csv(out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "test_fold,point,cp,shrinkage_cv,validation_fold,error");
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, r.records.size());
  const auto s = r.summary();
  EXPECT_EQ(s.at("folds").size(), 6u);
  EXPECT_EQ(s.at("model_class"), "tree");
  EXPECT_TRUE(s.at("folds")[0].at("winner").contains("cp"));
}

TEST_F(RunCvTest, SeveritySubsetFolds) {
  Portfolio port = simulate_portfolio(SimulationConfig::mtpl(3000), 4).portfolio;
  const auto sev = severity_view(port);
  const auto pf = stratified_folds(port, 6, 1);
  TuningGrid g = TuningGrid::defaults(ModelClass::Tree, LossKind::Gamma, sev.schema.size());
  g.cp = {0.001, 0.01};
  const auto r = run_cv(sev, pf.restrict(sev.source_rows), g, 3);
  EXPECT_EQ(r.loss, LossKind::Gamma);
  for (const auto& f : r.folds) EXPECT_TRUE(std::isfinite(f.test_error));
}

TEST_F(RunCvTest, Errors) {
  FoldAssignment bad = folds;
  bad.labels.pop_back();
  EXPECT_THROW(run_cv(p, bad, small_tree_grid(), 1), DataError);
  bad = random_folds(p.size(), 2, 1);
  EXPECT_THROW(run_cv(p, bad, small_tree_grid(), 1), std::invalid_argument);

  // Claims only in fold 1: GBM fits without folds 1 and l see none.
  RegressionProblem q = p;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (folds.labels[i] != 1) q.response[i] = 0.0;
  }
  TuningGrid g = TuningGrid::defaults(ModelClass::Gbm, LossKind::Poisson, 3);
  g.trees = {3};
  g.depth = {1};
  try {
    run_cv(q, folds, g, 1);
    FAIL() << "expected a failure";
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("grid point {\"depth\":1,\"trees\":3}"), std::string::npos)
        << e.what();
  }
}

}  // namespace
}  // namespace freqsev
