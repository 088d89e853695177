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

#include "freqsev/gbm.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "freqsev/error.hpp"
#include "freqsev/rng.hpp"
#include "freqsev/simd/kernels.hpp"

namespace freqsev {
namespace {

using nlohmann::json;

// Deviance of the training rows at link scores f (rate or mean exp(f)).
double training_deviance(const RegressionProblem& p, std::span<const std::uint32_t> rows,
                         const std::vector<double>& f, std::vector<double>& y,
                         std::vector<double>& mu, std::vector<double>& w) {
  const std::size_t n = rows.size();
  for (std::size_t k = 0; k < n; ++k) {
    y[k] = p.response[rows[k]];
    w[k] = p.weight[rows[k]];
    mu[k] = f[rows[k]];
  }
  const auto& kt = simd::kernels();
  kt.exp(mu.data(), mu.data(), n);
  return p.loss == LossKind::Poisson ? kt.poisson_deviance(y.data(), mu.data(), w.data(), n)
                                     : kt.gamma_deviance(y.data(), mu.data(), w.data(), n);
}

}  // namespace

void GbmParams::validate() const {
  if (depth < 1) throw std::invalid_argument("gbm: depth must be at least 1");
  if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) {
    throw std::invalid_argument("gbm: shrinkage must be in [0, 1]");
  }
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("gbm: delta must be in (0, 1]");
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("gbm: kappa must be in (0, 1)");
}

json GbmParams::to_json() const {
  return {{"trees", trees}, {"depth", depth}, {"shrinkage", shrinkage},
          {"delta", delta}, {"kappa", kappa}, {"seed", seed}};
}

GbmParams GbmParams::from_json(const json& j) {
  GbmParams p;
  p.trees = j.value("trees", p.trees);
  p.depth = j.value("depth", p.depth);
  p.shrinkage = j.value("shrinkage", p.shrinkage);
  p.delta = j.value("delta", p.delta);
  p.kappa = j.value("kappa", p.kappa);
  p.seed = j.value("seed", p.seed);
  return p;
}

Gbm::Gbm(LossKind loss, Schema schema, GbmParams params, double f0, std::vector<Tree> stages,
         std::vector<double> trace, std::size_t warnings)
    : loss_(loss), schema_(std::move(schema)), params_(params), f0_(f0), stages_(std::move(stages)),
      trace_(std::move(trace)), warnings_(warnings) {
  if (loss_ == LossKind::SquaredError) throw DataError("gbm: Poisson or gamma loss only");
  if (!std::isfinite(f0_)) throw DataError("gbm: non-finite initial score");
  for (const auto& s : stages_) {
    if (!(s.schema() == schema_)) throw DataError("gbm: stage schema mismatch");
  }
}

double Gbm::link_prefix(std::span<const double> x, std::size_t stages) const {
  if (stages > stages_.size()) throw std::invalid_argument("gbm: prefix out of range");
  double f = f0_;
  for (std::size_t t = 0; t < stages; ++t) f += stages_[t].predict(x);
  return f;
}

double Gbm::predict(std::span<const double> x) const { return std::exp(link(x)); }

double Gbm::predict_prefix(std::span<const double> x, std::size_t stages) const {
  return std::exp(link_prefix(x, stages));
}

std::vector<double> Gbm::predict(const FeatureMatrix& x) const {
  const std::size_t sizes[] = {stages_.size()};
  return std::move(predict_nested(x, sizes).front());
}

std::vector<std::vector<double>> Gbm::predict_nested(const FeatureMatrix& x,
                                                     std::span<const std::size_t> sizes,
                                                     std::span<const std::size_t> rows) const {
  const std::size_t n = rows.empty() ? x.rows() : rows.size();
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    if (sizes[s] > stages_.size() || (s > 0 && sizes[s] <= sizes[s - 1])) {
      throw std::invalid_argument("gbm: nested sizes must be ascending within 0..T");
    }
  }
  std::vector<std::vector<double>> out(sizes.size(), std::vector<double>(n));
  std::vector<double> f(n, f0_);
  std::size_t next = 0;
  auto record = [&] {
    for (std::size_t i = 0; i < n; ++i) out[next][i] = std::exp(f[i]);
    ++next;
  };
  while (next < sizes.size() && sizes[next] == 0) record();
  for (std::size_t t = 0; t < stages_.size() && next < sizes.size(); ++t) {
    for (std::size_t i = 0; i < n; ++i) f[i] += stages_[t].predict(x.row(rows.empty() ? i : rows[i]));
    if (t + 1 == sizes[next]) record();
  }
  return out;
}

json Gbm::to_json() const {
  json stages = json::array();
  for (const auto& s : stages_) stages.push_back(s.to_json());
  return {{"kind", "gbm"},   {"loss", to_string(loss_)}, {"params", params_.to_json()},
          {"f0", f0_},       {"trace", trace_},          {"warnings", warnings_},
          {"stages", stages}};
}

Gbm Gbm::from_json(const json& j, const Schema& schema) {
  try {
    std::vector<Tree> stages;
    for (const auto& s : j.at("stages")) stages.push_back(Tree::from_json(s, schema));
    return Gbm(parse_loss_kind(j.at("loss").get<std::string>()), schema,
               GbmParams::from_json(j.at("params")), j.at("f0").get<double>(), std::move(stages),
               j.value("trace", std::vector<double>{}), j.value("warnings", std::size_t{0}));
  } catch (const json::exception& e) {
    throw DataError(std::string("gbm json: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("gbm json: ") + e.what());
  }
}

Gbm fit_gbm(const TreeGrower& grower, const RegressionProblem& p,
            std::span<const std::uint32_t> rows, const GbmParams& params) {
  params.validate();
  if (p.size() == 0) throw std::invalid_argument("gbm: empty problem");
  if (p.loss == LossKind::SquaredError) throw std::invalid_argument("gbm: Poisson or gamma loss only");
  std::vector<std::uint32_t> owned;
  if (rows.empty()) {
    owned.resize(p.size());
    std::iota(owned.begin(), owned.end(), 0u);
    rows = owned;
  }
  const std::size_t n_all = p.size();
  const std::size_t n = rows.size();

  double num = 0.0, den = 0.0;
  for (std::uint32_t r : rows) {
    num += p.loss == LossKind::Poisson ? p.response[r] : p.weight[r] * p.response[r];
    den += p.weight[r];
  }
  if (!(num > 0.0)) throw std::invalid_argument("gbm: training rows have no claims");
  const double f0 = std::log(num / den);

  const auto& kt = simd::kernels();
  std::vector<double> f(n_all, f0);
  std::vector<double> residual(n_all, 0.0);
  const std::vector<double> ones(n_all, 1.0);
  std::vector<double> ybuf(n), mubuf(n), wbuf(n);
  std::vector<double> trace;
  trace.reserve(params.trees + 1);
  trace.push_back(training_deviance(p, rows, f, ybuf, mubuf, wbuf));

  TreeParams tp;
  tp.loss = LossKind::SquaredError;
  tp.cp = 0.0;
  tp.kappa = params.kappa;
  tp.max_depth = params.depth;

  const auto sample_size = static_cast<std::size_t>(
      std::max(1.0, std::nearbyint(params.delta * static_cast<double>(n))));
  std::vector<std::uint32_t> perm(n);
  std::vector<char> in_bag(n_all, 0);
  std::vector<std::uint32_t> sample;
  sample.reserve(sample_size);
  std::vector<std::uint32_t> leaf(n_all);
  std::vector<Tree> stages;
  stages.reserve(params.trees);
  std::size_t warnings = 0;

  for (std::size_t t = 0; t < params.trees; ++t) {
    Rng rng(derive_seed(params.seed, {t}));
    sample.clear();
    if (sample_size == n) {
      sample.assign(rows.begin(), rows.end());
    } else {
      std::copy(rows.begin(), rows.end(), perm.begin());
      for (std::size_t k = 0; k < sample_size; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, n - 1);
        std::swap(perm[k], perm[pick(rng)]);
      }
      for (std::size_t k = 0; k < sample_size; ++k) in_bag[perm[k]] = 1;
      for (std::uint32_t r : rows) {
        if (in_bag[r]) sample.push_back(r);
      }
      for (std::uint32_t r : sample) in_bag[r] = 0;
    }

    if (p.loss == LossKind::Poisson) {
      kt.poisson_gradient(p.response.data(), p.weight.data(), f.data(), residual.data(), n_all);
    } else {
      kt.gamma_gradient(p.response.data(), p.weight.data(), f.data(), residual.data(), n_all);
    }
    Tree stage = grower.grow(residual, ones, sample, tp);

    // Line search per leaf over the subsample.
    const std::size_t nodes = stage.nodes().size();
    std::vector<double> lnum(nodes, 0.0), lden(nodes, 0.0);
    for (std::uint32_t r : rows) leaf[r] = static_cast<std::uint32_t>(stage.leaf_of(p.x.row(r)));
    for (std::uint32_t r : sample) {
      const double ef = std::exp(f[r]);
      if (p.loss == LossKind::Poisson) {
        lnum[leaf[r]] += p.response[r];
        lden[leaf[r]] += p.weight[r] * ef;
      } else {
        lnum[leaf[r]] += p.weight[r] * p.response[r] / ef;
        lden[leaf[r]] += p.weight[r];
      }
    }
    std::vector<double> step(nodes, 0.0);
    for (std::size_t j = 0; j < nodes; ++j) {
      if (!stage.nodes()[j].leaf()) continue;
      if (lnum[j] > 0.0 && lden[j] > 0.0 && std::isfinite(lnum[j] / lden[j])) {
        step[j] = params.shrinkage * std::log(lnum[j] / lden[j]);
      } else {
        ++warnings;
      }
    }
    stage.set_leaf_values(step);

    if (n == n_all) {
      kt.add_gathered(f.data(), leaf.data(), step.data(), n_all);
    } else {
      for (std::uint32_t r : rows) f[r] += step[leaf[r]];
    }
    trace.push_back(training_deviance(p, rows, f, ybuf, mubuf, wbuf));
    stages.push_back(std::move(stage));
  }
  return Gbm(p.loss, p.schema, params, f0, std::move(stages), std::move(trace), warnings);
}

Gbm fit_gbm(const RegressionProblem& problem, const GbmParams& params) {
  problem.validate();
  const TreeGrower grower(problem.schema, problem.x);
  return fit_gbm(grower, problem, {}, params);
}

}  // namespace freqsev
