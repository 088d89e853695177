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

#include "freqsev/forest.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "freqsev/error.hpp"
#include "freqsev/parallel.hpp"
#include "freqsev/rng.hpp"

namespace freqsev {
namespace {

using nlohmann::json;

std::vector<std::uint32_t> all_rows(std::size_t n) {
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

}  // namespace

void ForestParams::validate(std::size_t features) const {
  if (trees == 0) throw std::invalid_argument("forest: need at least one tree");
  if (mtry == 0 || mtry > features) throw std::invalid_argument("forest: m must be in 1..p");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("forest: delta must be in (0, 1]");
  if (!(cp >= 0.0 && cp <= 1.0)) throw std::invalid_argument("forest: cp must be in [0, 1]");
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("forest: kappa must be in (0, 1)");
  if (shrinkage_cv && !(*shrinkage_cv >= 0.0)) {
    throw std::invalid_argument("forest: shrinkage cv must be non-negative");
  }
}

json ForestParams::to_json() const {
  json j{{"trees", trees}, {"m", mtry},       {"delta", delta}, {"cp", cp},
         {"kappa", kappa}, {"seed", seed},    {"bootstrap", bootstrap}};
  j["shrinkage_cv"] = shrinkage_cv ? json(*shrinkage_cv) : json(nullptr);
  return j;
}

ForestParams ForestParams::from_json(const json& j) {
  ForestParams p;
  p.trees = j.value("trees", p.trees);
  p.mtry = j.value("m", p.mtry);
  p.delta = j.value("delta", p.delta);
  p.cp = j.value("cp", p.cp);
  p.kappa = j.value("kappa", p.kappa);
  p.seed = j.value("seed", p.seed);
  p.bootstrap = j.value("bootstrap", p.bootstrap);
  if (j.contains("shrinkage_cv")) {
    const auto& s = j.at("shrinkage_cv");
    p.shrinkage_cv = s.is_null() ? std::nullopt : std::optional<double>(s.get<double>());
  }
  return p;
}

Forest::Forest(ForestParams params, std::vector<Tree> trees, std::vector<std::uint64_t> tree_seeds)
    : params_(params), trees_(std::move(trees)), seeds_(std::move(tree_seeds)) {
  if (trees_.empty()) throw DataError("forest: no trees");
  if (seeds_.size() != trees_.size()) throw DataError("forest: one seed per tree");
  for (const auto& t : trees_) {
    if (t.loss() != trees_.front().loss() || !(t.schema() == trees_.front().schema())) {
      throw DataError("forest: member trees disagree on loss or schema");
    }
  }
}

double Forest::predict_prefix(std::span<const double> x, std::size_t trees) const {
  if (trees == 0 || trees > trees_.size()) throw std::invalid_argument("forest: prefix out of range");
  double sum = 0.0;
  for (std::size_t t = 0; t < trees; ++t) sum += trees_[t].predict(x);
  return sum / static_cast<double>(trees);
}

std::vector<double> Forest::predict(const FeatureMatrix& x) const {
  const std::size_t sizes[] = {trees_.size()};
  return std::move(predict_nested(x, sizes).front());
}

std::vector<std::vector<double>> Forest::predict_nested(const FeatureMatrix& x,
                                                        std::span<const std::size_t> sizes,
                                                        std::span<const std::size_t> rows) const {
  const std::size_t n = rows.empty() ? x.rows() : rows.size();
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    if (sizes[s] == 0 || sizes[s] > trees_.size() || (s > 0 && sizes[s] <= sizes[s - 1])) {
      throw std::invalid_argument("forest: nested sizes must be ascending within 1..T");
    }
  }
  std::vector<std::vector<double>> out(sizes.size(), std::vector<double>(n));
  std::vector<double> sum(n, 0.0);
  std::size_t next = 0;
  for (std::size_t t = 0; t < trees_.size() && next < sizes.size(); ++t) {
    for (std::size_t i = 0; i < n; ++i) sum[i] += trees_[t].predict(x.row(rows.empty() ? i : rows[i]));
    if (t + 1 == sizes[next]) {
      const double T = static_cast<double>(t + 1);
      for (std::size_t i = 0; i < n; ++i) out[next][i] = sum[i] / T;
      ++next;
    }
  }
  return out;
}

json Forest::to_json() const {
  json trees = json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"kind", "forest"}, {"params", params_.to_json()}, {"tree_seeds", seeds_}, {"trees", trees}};
}

Forest Forest::from_json(const json& j, const Schema& schema) {
  try {
    std::vector<Tree> trees;
    for (const auto& t : j.at("trees")) trees.push_back(Tree::from_json(t, schema));
    return Forest(ForestParams::from_json(j.at("params")), std::move(trees),
                  j.at("tree_seeds").get<std::vector<std::uint64_t>>());
  } catch (const json::exception& e) {
    throw DataError(std::string("forest json: ") + e.what());
  }
}

Forest fit_forest(const TreeGrower& grower, const RegressionProblem& problem,
                  std::span<const std::uint32_t> rows, const ForestParams& params,
                  std::size_t threads) {
  params.validate(problem.schema.size());
  if (problem.size() == 0) throw std::invalid_argument("forest: empty problem");
  if (problem.loss == LossKind::SquaredError) throw std::invalid_argument("forest: Poisson or gamma loss only");
  std::vector<std::uint32_t> owned;
  if (rows.empty()) {
    owned = all_rows(problem.size());
    rows = owned;
  }

  TreeParams tp;
  tp.loss = problem.loss;
  tp.cp = params.cp;
  tp.kappa = params.kappa;
  tp.mtry = params.mtry;
  tp.shrinkage_cv = problem.loss == LossKind::Poisson ? params.shrinkage_cv : std::nullopt;

  const auto sample_size = static_cast<std::size_t>(
      std::max(1.0, std::nearbyint(params.delta * static_cast<double>(rows.size()))));
  std::vector<std::optional<Tree>> trees(params.trees);
  std::vector<std::uint64_t> seeds(params.trees);
  parallel_for(params.trees, threads, [&](std::size_t t) {
    const std::uint64_t seed = derive_seed(params.seed, {t});
    seeds[t] = seed;
    Rng rng(seed);
    std::vector<std::uint32_t> sample;
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
      sample.resize(sample_size);
      for (auto& r : sample) r = rows[pick(rng)];
    } else {
      sample.assign(rows.begin(), rows.end());
    }
    trees[t] = grower.grow(problem.response, problem.weight, sample, tp, rng());
  });
  std::vector<Tree> out;
  out.reserve(trees.size());
  for (auto& t : trees) out.push_back(std::move(*t));
  return Forest(params, std::move(out), std::move(seeds));
}

Forest fit_forest(const RegressionProblem& problem, const ForestParams& params, std::size_t threads) {
  problem.validate();
  const TreeGrower grower(problem.schema, problem.x);
  return fit_forest(grower, problem, {}, params, threads);
}

}  // namespace freqsev
