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

#include "freqsev/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "freqsev/error.hpp"
#include "test_util.hpp"

namespace freqsev {
namespace {

using testing::random_problem;

std::vector<Model> fitted_models(const RegressionProblem& p) {
  TreeParams tp;
  tp.loss = p.loss;
  tp.cp = 0.001;
  tp.kappa = 0.05;
  ForestParams fp;
  fp.trees = 5;
  fp.mtry = 2;
  fp.kappa = 0.05;
  fp.seed = 3;
  GbmParams gp;
  gp.trees = 20;
  gp.depth = 2;
  gp.shrinkage = 0.1;
  gp.seed = 4;
  return {Model(grow_tree(p, tp)), Model(fit_forest(p, fp)), Model(fit_gbm(p, gp))};
}

TEST(ModelClass, Names) {
  for (auto c : {ModelClass::Tree, ModelClass::Forest, ModelClass::Gbm}) {
    EXPECT_EQ(parse_model_class(to_string(c)), c);
  }
  EXPECT_THROW(parse_model_class("glm"), UsageError);
}

TEST(Model, DispatchesToTheLearner) {
  const auto p = random_problem(LossKind::Poisson, 400, 2, 1, 3, 1);
  const auto models = fitted_models(p);
  EXPECT_EQ(models[0].model_class(), ModelClass::Tree);
  EXPECT_EQ(models[1].model_class(), ModelClass::Forest);
  EXPECT_EQ(models[2].model_class(), ModelClass::Gbm);
  for (std::size_t i = 0; i < 20; ++i) {
    const auto x = p.x.row(i);
    EXPECT_EQ(models[0].predict(x), models[0].tree()->predict(x));
    EXPECT_EQ(models[1].predict(x), models[1].forest()->predict(x));
    EXPECT_EQ(models[2].predict(x), models[2].gbm()->predict(x));
    EXPECT_EQ(models[2].predict_link(x), models[2].gbm()->link(x));
    EXPECT_EQ(models[0].predict_link(x), std::log(models[0].predict(x)));
  }
  for (const auto& m : models) {
    EXPECT_EQ(m.loss(), LossKind::Poisson);
    EXPECT_EQ(m.schema(), p.schema);
    const auto all = m.predict(p.x);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(all[i], m.predict(p.x.row(i)));
  }
}

TEST(Model, ImportanceAveragesMembers) {
  const Schema s = testing::numeric_schema(2);
  // {x0: 3, x1: 1} and {x0: 1, x1: 1}
  std::vector<TreeNode> a(5);
  a[0] = {.left = 1, .right = 2, .feature = 0, .threshold = 0.5, .improvement = 3.0};
  a[1].prediction = 1.0;
  a[2] = {.left = 3, .right = 4, .feature = 1, .threshold = 0.5, .improvement = 1.0};
  a[3].prediction = 1.0;
  a[4].prediction = 2.0;
  std::vector<TreeNode> b = a;
  b[0].improvement = 1.0;
  Forest f(ForestParams{}, {Tree(LossKind::Poisson, s, a), Tree(LossKind::Poisson, s, b)}, {1, 2});
  const auto imp = Model(f).importance();
  EXPECT_DOUBLE_EQ(imp[0], 2.0);
  EXPECT_DOUBLE_EQ(imp[1], 1.0);
}

TEST(Model, SaveLoadRoundTrip) {
  for (auto loss : {LossKind::Poisson, LossKind::Gamma}) {
    const auto p = random_problem(loss, 300, 2, 1, 3, 2);
    const auto dir = std::filesystem::temp_directory_path() / "freqsev_model_test";
    std::filesystem::create_directories(dir);
    for (const auto& m : fitted_models(p)) {
      const auto path = dir / (std::string(to_string(m.model_class())) + ".json");
      m.save(path);
      const Model back = Model::load(path);
      EXPECT_EQ(back.model_class(), m.model_class());
      EXPECT_EQ(back.loss(), loss);
      for (std::size_t i = 0; i < p.size(); ++i) {
        EXPECT_EQ(back.predict(p.x.row(i)), m.predict(p.x.row(i)));
      }
      EXPECT_EQ(back.to_json(), m.to_json());
    }
    std::filesystem::remove_all(dir);
  }
}

TEST(Model, LoadErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "freqsev_model_errors";
  std::filesystem::create_directories(dir);
  EXPECT_THROW(Model::load(dir / "missing.json"), DataError);
  std::ofstream(dir / "garbage.json") << "{not json";
  EXPECT_THROW(Model::load(dir / "garbage.json"), DataError);
  std::ofstream(dir / "other.json") << R"({"format":"something","version":1})";
  EXPECT_THROW(Model::load(dir / "other.json"), DataError);
  const auto p = random_problem(LossKind::Poisson, 100, 2, 0, 0, 3);
  auto j = fitted_models(p)[0].to_json();
  j["class"] = "svm";
  EXPECT_THROW(Model::from_json(j), DataError);
  j["class"] = "gbm";
  EXPECT_THROW(Model::from_json(j), DataError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace freqsev
