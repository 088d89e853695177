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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "freqsev/error.hpp"
#include "freqsev/loss.hpp"
#include "freqsev/tree.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace freqsev {
namespace {

using testing::random_problem;

using testing::brute_force_root_split;
using testing::OracleSplit;
using testing::node_deviance;
using testing::Rows;

class RootSplitOracle : public ::testing::TestWithParam<LossKind> {};

TEST_P(RootSplitOracle, MatchesExhaustiveSearch) {
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const std::size_t n = 8 + seed % 23;  // 8..30
    const std::size_t numeric = 1 + seed % 2;
    const std::size_t cats = seed % 3 == 0 ? 0 : 1;
    auto p = random_problem(GetParam(), n, numeric, cats, 4, seed);
    for (std::optional<double> cv : {std::optional<double>{}, std::optional<double>{0.5}}) {
      if (cv && GetParam() != LossKind::Poisson) continue;
      TreeParams params;
      params.kappa = 0.1;
      params.max_depth = 1;
      params.shrinkage_cv = cv;
      const Tree t = grow_tree(p, params);
      const OracleSplit o = brute_force_root_split(p, params.kappa, cv);
      const bool oracle_splits = o.found && o.delta > 1e-9 * (1 + t.root_loss());
      ASSERT_EQ(!t.root().leaf(), oracle_splits) << "seed " << seed;
      if (!oracle_splits) continue;
      ++compared;
      const TreeNode& r = t.root();
      EXPECT_NEAR(r.improvement, o.delta, 1e-9 * std::max(1.0, o.delta)) << "seed " << seed;
      EXPECT_EQ(static_cast<std::size_t>(r.feature), o.feature) << "seed " << seed;
      if (o.left_levels.empty()) {
        EXPECT_NEAR(r.threshold, o.threshold, 1e-12 * std::max(1.0, std::abs(o.threshold)));
      } else {
        EXPECT_EQ(r.left_levels, o.left_levels) << "seed " << seed;
      }
    }
  }
  EXPECT_GT(compared, 30);
}

INSTANTIATE_TEST_SUITE_P(AllLosses, RootSplitOracle,
                         ::testing::Values(LossKind::Poisson, LossKind::Gamma, LossKind::SquaredError),
                         [](const auto& info) { return std::string(to_string(info.param)); });

// Best binary partition of the levels of a single categorical feature.
double best_partition(const RegressionProblem& p) {
  const std::size_t k = p.schema[0].levels.size();
  Rows all(p.size());
  std::iota(all.begin(), all.end(), 0);
  const double root = node_deviance(p, all, std::nullopt, 0);
  double best = 0;
  for (std::uint32_t mask = 1; mask < (1u << (k - 1)); ++mask) {
    Rows l, r;
    for (std::size_t i = 0; i < p.size(); ++i) {
      ((mask >> static_cast<std::uint32_t>(p.x(i, 0))) & 1u ? l : r).push_back(i);
    }
    if (l.empty() || r.empty()) continue;
    best = std::max(best, root - node_deviance(p, l, std::nullopt, 0) - node_deviance(p, r, std::nullopt, 0));
  }
  return best;
}

TEST(CategoricalOrdering, FindsBestPartitionUnderSquaredError) {
  int agree_poisson = 0, agree_gamma = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const std::size_t levels = 2 + seed % 5;  // 2..6
    TreeParams params;
    params.kappa = 1e-6;
    params.max_depth = 1;
    auto p = random_problem(LossKind::SquaredError, 60, 0, 1, levels, seed);
    const double oracle = best_partition(p);
    const Tree t = grow_tree(p, params);
    ASSERT_FALSE(t.root().leaf());
    EXPECT_NEAR(t.root().improvement, oracle, 1e-9 * oracle) << "seed " << seed;

    for (LossKind loss : {LossKind::Poisson, LossKind::Gamma}) {
      auto q = random_problem(loss, 60, 0, 1, levels, seed);
      const double o = best_partition(q);
      const Tree tq = grow_tree(q, params);
      const double got = tq.root().leaf() ? 0.0 : tq.root().improvement;
      if (std::abs(got - o) <= 1e-9 * std::max(1.0, o)) ++(loss == LossKind::Poisson ? agree_poisson : agree_gamma);
    }
    ++total;
  }
  RecordProperty("poisson_agreement", std::to_string(agree_poisson) + "/" + std::to_string(total));
  RecordProperty("gamma_agreement", std::to_string(agree_gamma) + "/" + std::to_string(total));
}

TEST(OrderCategoricalLevels, Examples) {
  const std::vector<std::string> ab{"A", "B"};
  std::vector<std::uint32_t> codes{0, 0, 1, 1};
  std::vector<double> y{0.2, 0.2, 0.1, 0.1}, w{1, 1, 1, 1};
  EXPECT_EQ(order_categorical_levels(LossKind::SquaredError, ab, codes, y, w), (std::vector<std::string>{"B", "A"}));
  // Poisson: claims per exposure.
  std::vector<double> n{2, 0, 1, 0}, e{1, 1, 0.25, 0.25};
  EXPECT_EQ(order_categorical_levels(LossKind::Poisson, ab, codes, n, e), (std::vector<std::string>{"A", "B"}));
  const std::vector<std::string> zyx{"z", "y", "x"};
  std::vector<std::uint32_t> c3{0, 1, 2};
  std::vector<double> same{1, 1, 1}, ones{1, 1, 1};
  EXPECT_EQ(order_categorical_levels(LossKind::Gamma, zyx, c3, same, ones), (std::vector<std::string>{"x", "y", "z"}));
  // Gamma weighted means: p: (100*1 + 400*3)/4 = 325, q: 300, r: (500*1+100*1)/2 = 300 -> tie by name.
  const std::vector<std::string> pqr{"p", "q", "r"};
  std::vector<std::uint32_t> c5{0, 0, 1, 2, 2};
  std::vector<double> sev{100, 400, 300, 500, 100}, cnt{1, 3, 2, 1, 1};
  EXPECT_EQ(order_categorical_levels(LossKind::Gamma, pqr, c5, sev, cnt), (std::vector<std::string>{"q", "r", "p"}));
  std::vector<std::uint32_t> missing{0, 0};
  std::vector<double> two{1, 1};
  EXPECT_THROW(order_categorical_levels(LossKind::Gamma, ab, missing, two, two), std::invalid_argument);
}

TEST(Grow, ConstantResponseDoesNotSplit) {
  auto p = random_problem(LossKind::SquaredError, 50, 2, 1, 3, 4);
  std::fill(p.response.begin(), p.response.end(), 3.25);
  EXPECT_TRUE(grow_tree(p, TreeParams{}).root().leaf());
  auto g = random_problem(LossKind::Gamma, 50, 2, 1, 3, 4);
  std::fill(g.response.begin(), g.response.end(), 812.5);
  EXPECT_TRUE(grow_tree(g, TreeParams{}).root().leaf());
}

TEST(Grow, TwoValuesSplitAtMidpoint) {
  auto p = random_problem(LossKind::SquaredError, 10, 1, 0, 0, 1);
  for (std::size_t i = 0; i < 10; ++i) {
    p.x(i, 0) = i < 5 ? 1.0 : 2.0;
    p.response[i] = i < 5 ? 0.0 : 1.0;
  }
  const Tree t = grow_tree(p, TreeParams{});
  ASSERT_FALSE(t.root().leaf());
  EXPECT_EQ(t.root().threshold, 1.5);
  EXPECT_EQ(t.leaf_count(), 2u);
  EXPECT_NEAR(t.root().improvement, 2.5, 1e-12);
}

TEST(Grow, CpOneGivesRootOnlyTree) {
  for (LossKind loss : {LossKind::Poisson, LossKind::Gamma, LossKind::SquaredError}) {
    auto p = random_problem(loss, 300, 3, 1, 4, 9);
    TreeParams params;
    params.cp = 1.0;
    EXPECT_TRUE(grow_tree(p, params).root().leaf());
  }
  // Even a perfectly separable response stays a root.
  auto p = random_problem(LossKind::SquaredError, 10, 1, 0, 0, 1);
  for (std::size_t i = 0; i < 10; ++i) p.response[i] = p.x(i, 0) < 5 ? 0 : 1;
  TreeParams params;
  params.cp = 1.0;
  EXPECT_TRUE(grow_tree(p, params).root().leaf());
}

TEST(Grow, CpZeroGrowsUntilStoppingRuleBinds) {
  auto p = random_problem(LossKind::Poisson, 400, 2, 1, 4, 3);
  TreeParams params;
  params.kappa = 0.05;
  const Tree t = grow_tree(p, params);
  TreeParams bigger = params;
  bigger.cp = 0.001;
  EXPECT_GE(t.leaf_count(), grow_tree(p, bigger).leaf_count());
  // No leaf of the cp = 0 tree admits a split with positive improvement.
  for (std::size_t li = 0; li < t.nodes().size(); ++li) {
    if (!t.nodes()[li].leaf()) continue;
    RegressionProblem sub;
    sub.loss = p.loss;
    sub.schema = p.schema;
    sub.x = FeatureMatrix(0, p.x.cols());
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (t.leaf_of(p.x.row(i)) != li) continue;
      sub.x.append_row(p.x.row(i));
      sub.response.push_back(p.response[i]);
      sub.weight.push_back(p.weight[i]);
      sub.source_rows.push_back(i);
    }
    // kappa is relative to the whole sample: rescale for the sub-problem.
    const double k = params.kappa * static_cast<double>(p.size()) / static_cast<double>(sub.size());
    if (k >= 0.5) continue;
    const auto o = brute_force_root_split(sub, k, std::nullopt);
    if (o.found) EXPECT_LE(o.delta, 1e-9 * (1 + t.nodes()[li].deviance));
  }
}

TEST(Grow, KappaBoundsLeafSize) {
  for (LossKind loss : {LossKind::Poisson, LossKind::Gamma, LossKind::SquaredError}) {
    auto p = random_problem(loss, 200, 3, 1, 5, 21);
    const Tree t = grow_tree(p, TreeParams{});
    for (const auto& n : t.nodes()) EXPECT_GE(n.count, 2u);
    TreeParams params;
    params.kappa = 0.1;
    const Tree coarse = grow_tree(p, params);
    for (const auto& n : coarse.nodes()) EXPECT_GE(n.count, 20u);
  }
}

TEST(Grow, MaxDepthLimitsSplitLevels) {
  auto p = random_problem(LossKind::SquaredError, 500, 3, 0, 0, 2);
  for (int d : {0, 1, 2, 3}) {
    TreeParams params;
    params.max_depth = d;
    EXPECT_LE(grow_tree(p, params).depth(), d);
  }
  TreeParams stump;
  stump.max_depth = 1;
  EXPECT_EQ(grow_tree(p, stump).leaf_count(), 2u);
}

TEST(Grow, EverySplitDecreasesTrainingDevianceByItsImprovement) {
  for (LossKind loss : {LossKind::Poisson, LossKind::Gamma, LossKind::SquaredError}) {
    auto p = random_problem(loss, 600, 3, 1, 4, 5);
    TreeParams params;
    params.cp = 0.002;
    params.kappa = 0.02;
    if (loss == LossKind::Poisson) params.shrinkage_cv = 0.5;
    const Tree t = grow_tree(p, params);
    ASSERT_GT(t.leaf_count(), 2u);
    for (const auto& n : t.nodes()) {
      if (n.leaf()) continue;
      EXPECT_GE(n.improvement, params.cp * t.root_loss());
      const double children = t.nodes()[n.left].deviance + t.nodes()[n.right].deviance;
      EXPECT_NEAR(n.deviance - children, n.improvement, 1e-9 * t.root_loss());
    }
    // Leaf deviances add up to the full training deviance of the tree.
    const auto mu = t.predict(p.x);
    double leaves = 0;
    for (const auto& n : t.nodes()) leaves += n.leaf() ? n.deviance : 0.0;
    if (loss != LossKind::SquaredError) {
      EXPECT_NEAR(loss::deviance(loss, p.response, mu, p.weight), leaves, 1e-9 * t.root_loss());
    }
  }
}

double golden(const std::function<double(double)>& f, double a, double b) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 300 && b - a > 1e-13 * std::abs(a + b); ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    (f(c) < f(d) ? b : a) = f(c) < f(d) ? d : c;
  }
  return (a + b) / 2;
}

TEST(Grow, LeafPredictionsMinimizeNodeDeviance) {
  for (LossKind loss : {LossKind::Poisson, LossKind::Gamma}) {
    auto p = random_problem(loss, 300, 2, 1, 3, 17);
    TreeParams params;
    params.kappa = 0.1;
    const Tree t = grow_tree(p, params);
    for (std::size_t li = 0; li < t.nodes().size(); ++li) {
      const auto& node = t.nodes()[li];
      if (!node.leaf()) continue;
      std::vector<double> y, w;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (t.leaf_of(p.x.row(i)) == li) {
          y.push_back(p.response[i]);
          w.push_back(p.weight[i]);
        }
      }
      if (std::accumulate(y.begin(), y.end(), 0.0) == 0.0) {
        EXPECT_EQ(node.prediction, 0.0);
        continue;
      }
      const double hi = 10 * node.prediction;
      const double oracle = golden([&](double m) { return loss::deviance(loss, y, std::vector<double>(y.size(), m), w); },
                                   1e-3 * node.prediction, hi);
      EXPECT_NEAR(node.prediction, oracle, 1e-6 * oracle);
    }
  }
}

TEST(Grow, ShrinkageMovesLeavesTowardsRoot) {
  auto p = random_problem(LossKind::Poisson, 500, 2, 1, 3, 31);
  TreeParams params;
  params.kappa = 0.05;
  params.max_depth = 2;
  const Tree plain = grow_tree(p, params);
  params.shrinkage_cv = 0.0;
  const Tree flat = grow_tree(p, params);
  for (const auto& n : flat.nodes()) EXPECT_DOUBLE_EQ(n.prediction, flat.root().prediction);
  EXPECT_DOUBLE_EQ(flat.root().prediction, plain.root().prediction);
  params.shrinkage_cv = 0.1;
  const Tree shrunk = grow_tree(p, params);
  for (const auto& n : shrunk.nodes()) {
    EXPECT_GT(n.prediction, 0.0);
  }
}

TEST(Grow, DeterministicAndSeededFeatureDraws) {
  auto p = random_problem(LossKind::Poisson, 400, 3, 2, 4, 8);
  TreeParams params;
  params.mtry = 2;
  params.kappa = 0.02;
  std::vector<std::uint32_t> rows(p.size());
  std::iota(rows.begin(), rows.end(), 0u);
  TreeGrower g(p.schema, p.x);
  const auto a = g.grow(p.response, p.weight, rows, params, 5).to_json();
  EXPECT_EQ(a, g.grow(p.response, p.weight, rows, params, 5).to_json());
  bool differs = false;
  for (std::uint64_t s = 6; s < 12 && !differs; ++s) differs = a != g.grow(p.response, p.weight, rows, params, s).to_json();
  EXPECT_TRUE(differs);
  EXPECT_EQ(grow_tree(p, TreeParams{}).to_json(), grow_tree(p, TreeParams{}).to_json());
}

TEST(Grow, RejectsBadInput) {
  auto p = random_problem(LossKind::Poisson, 20, 1, 0, 0, 1);
  TreeParams bad;
  bad.cp = 1.5;
  EXPECT_THROW(grow_tree(p, bad), std::invalid_argument);
  bad = TreeParams{};
  bad.kappa = 0;
  EXPECT_THROW(grow_tree(p, bad), std::invalid_argument);
  RegressionProblem empty;
  EXPECT_THROW(grow_tree(empty, TreeParams{}), DataError);
  TreeGrower g(p.schema, p.x);
  EXPECT_THROW(g.grow(p.response, p.weight, {}, TreeParams{}), std::invalid_argument);
}

TEST(Predict, RootOnlyPoissonTreePredictsPortfolioRate) {
  auto p = random_problem(LossKind::Poisson, 200, 2, 1, 3, 12);
  TreeParams params;
  params.cp = 1;
  const Tree t = grow_tree(p, params);
  const double rate = std::accumulate(p.response.begin(), p.response.end(), 0.0) /
                      std::accumulate(p.weight.begin(), p.weight.end(), 0.0);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_DOUBLE_EQ(t.predict(p.x.row(i)), rate);
}

Schema two_feature_schema() {
  return Schema({{"bm", FeatureKind::Continuous, {}}, {"fuel", FeatureKind::Categorical, {"gasoline", "diesel"}}});
}

Tree hand_tree() {
  // bm <= 3.5 ? 0.1 : (fuel in {diesel} ? 0.3 : 0.2)
  std::vector<TreeNode> nodes(5);
  nodes[0].left = 1;
  nodes[0].right = 2;
  nodes[0].feature = 0;
  nodes[0].threshold = 3.5;
  nodes[0].improvement = 12.5;
  nodes[1].prediction = 0.1;
  nodes[2].left = 3;
  nodes[2].right = 4;
  nodes[2].feature = 1;
  nodes[2].left_levels = {1};
  nodes[2].improvement = 2.25;
  nodes[3].prediction = 0.3;
  nodes[4].prediction = 0.2;
  const double w[] = {100, 60, 40, 15, 25};
  const double d[] = {80, 30, 37.5, 10, 25.25};
  for (int i = 0; i < 5; ++i) {
    nodes[i].weight = w[i];
    nodes[i].count = static_cast<std::size_t>(w[i]) + 5;
    nodes[i].deviance = d[i];
    if (nodes[i].prediction == 0) nodes[i].prediction = 0.14;
  }
  return Tree(LossKind::Poisson, two_feature_schema(), nodes);
}

TEST(Predict, HandBuiltRouting) {
  const Tree t = hand_tree();
  EXPECT_EQ(t.predict(std::vector<double>{3.5, 0}), 0.1);
  EXPECT_EQ(t.predict(std::vector<double>{3.6, 0}), 0.2);
  EXPECT_EQ(t.predict(std::vector<double>{10, 1}), 0.3);
  EXPECT_THROW(t.predict(std::vector<double>{10, 2}), DataError);
  EXPECT_EQ(t.leaf_count(), 3u);
  EXPECT_EQ(t.depth(), 2);
  EXPECT_EQ(t.importance(), (std::vector<double>{12.5, 2.25}));
}

TEST(Export, FilingLayout) {
  const std::string expected =
      "tree loss=poisson nodes=5 leaves=3\n"
      "node) split n weight deviance yval improvement, * terminal\n"
      "1) root n=105 weight=100 deviance=80 yval=0.14 improvement=12.5\n"
      "  2) bm <= 3.5 n=65 weight=60 deviance=30 yval=0.1 *\n"
      "  3) bm > 3.5 n=45 weight=40 deviance=37.5 yval=0.14 improvement=2.25\n"
      "    6) fuel in [\"diesel\"] n=20 weight=15 deviance=10 yval=0.3 *\n"
      "    7) fuel not in [\"diesel\"] n=30 weight=25 deviance=25.25 yval=0.2 *\n";
  EXPECT_EQ(hand_tree().to_text(), expected);
  const Tree root(LossKind::Gamma, two_feature_schema(), {TreeNode{}});
  const std::string text = root.to_text();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_NE(text.find("1) root n=0"), std::string::npos);
}

// Routes x through the printed listing, reading only the text.
double route_by_text(const std::string& text, const Schema& schema, std::span<const double> x) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  std::size_t i = 0;
  int depth = 0;
  for (;;) {
    const std::string& l = lines[i];
    const double yval = std::stod(l.substr(l.find("yval=") + 5));
    if (l.size() >= 2 && l.substr(l.size() - 2) == " *") return yval;
    // Next line is the left child; its condition decides.
    ++depth;
    const std::string& child = lines[i + 1];
    std::istringstream cond(child.substr(child.find(") ") + 2));
    std::string name, op;
    cond >> name >> op;
    const std::size_t j = schema.index_of(name);
    bool left;
    if (op == "<=") {
      double c;
      cond >> c;
      left = x[j] <= c;
    } else {
      std::string rest;
      std::getline(cond, rest);
      left = rest.find("\"" + schema.decode(j, x[j]) + "\"") != std::string::npos;
    }
    if (left) {
      i = i + 1;
      continue;
    }
    // Skip the left subtree: find the next line at this depth.
    std::size_t k = i + 2;
    while (lines[k].find_first_not_of(' ') != static_cast<std::size_t>(2 * depth)) ++k;
    i = k;
  }
}

TEST(Export, GrownTreeRoutesLikePrintedSplits) {
  auto p = random_problem(LossKind::Poisson, 400, 2, 1, 4, 77);
  TreeParams params;
  params.kappa = 0.05;
  params.cp = 0.004;
  const Tree t = grow_tree(p, params);
  EXPECT_GE(t.leaf_count(), 5u);
  const std::string text = t.to_text();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 10);
  std::uniform_int_distribution<int> lv(0, 3);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> x{u(rng), u(rng), static_cast<double>(lv(rng))};
    EXPECT_EQ(route_by_text(text, p.schema, x), t.predict(x));
  }
}

TEST(Export, TextAndJsonRoundTrip) {
  for (LossKind loss : {LossKind::Poisson, LossKind::Gamma, LossKind::SquaredError}) {
    auto p = random_problem(loss, 500, 3, 2, 5, 13);
    const Tree t = grow_tree(p, TreeParams{});
    const Tree back = Tree::from_text(t.to_text(), p.schema);
    const Tree json_back = Tree::from_json(t.to_json(), p.schema);
    EXPECT_EQ(back.to_text(), t.to_text());
    EXPECT_EQ(json_back.to_json(), t.to_json());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 11);
    std::uniform_int_distribution<int> lv(0, 4);
    for (int k = 0; k < 100; ++k) {
      std::vector<double> x{u(rng), u(rng), u(rng), static_cast<double>(lv(rng)), static_cast<double>(lv(rng))};
      EXPECT_EQ(back.predict(x), t.predict(x));
      EXPECT_EQ(json_back.predict(x), t.predict(x));
    }
  }
}

TEST(Export, RejectsMalformedText) {
  const Schema s = two_feature_schema();
  EXPECT_THROW(Tree::from_text("nonsense\n", s), DataError);
  std::string text = hand_tree().to_text();
  EXPECT_THROW(Tree::from_text(text.substr(0, text.rfind("    7)")), s), DataError);
  std::string bad = text;
  bad.replace(bad.find("\"diesel\""), 8, "\"electric\"");
  EXPECT_THROW(Tree::from_text(bad, s), DataError);
}

TEST(TreeStructure, RejectsInvalidNodes) {
  std::vector<TreeNode> nodes(3);
  nodes[0].left = 1;
  nodes[0].right = 1;
  nodes[0].feature = 0;
  EXPECT_THROW(Tree(LossKind::Poisson, two_feature_schema(), nodes), DataError);
  nodes[0].right = 2;
  nodes[0].feature = 5;
  EXPECT_THROW(Tree(LossKind::Poisson, two_feature_schema(), nodes), DataError);
  nodes[0].feature = 1;  // categorical without levels
  EXPECT_THROW(Tree(LossKind::Poisson, two_feature_schema(), nodes), DataError);
}

}  // namespace
}  // namespace freqsev
