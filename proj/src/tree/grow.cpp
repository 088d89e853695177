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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "freqsev/error.hpp"
#include "freqsev/tree.hpp"

namespace freqsev {
namespace {

// Sufficient statistics of a set of rows. For Poisson w is exposure, s the
// claim count and c = sum y ln(y / e); for gamma s = sum w y and
// c = sum w ln y; for squared error s = sum w y and c = sum w y^2.
struct Stats {
  double w = 0.0;
  double s = 0.0;
  double c = 0.0;
  std::size_t n = 0;

  void add(const Stats& o) {
    w += o.w;
    s += o.s;
    c += o.c;
    n += o.n;
  }
  Stats minus(const Stats& o) const { return {w - o.w, s - o.s, c - o.c, n - o.n}; }
};

class NodeModel {
 public:
  NodeModel(const TreeParams& p, double root_rate) : loss_(p.loss), root_rate_(root_rate) {
    // A claim-free sample has every shrunken rate at zero: same as no prior.
    if (p.loss == LossKind::Poisson && p.shrinkage_cv && root_rate > 0.0) {
      shrink_ = true;
      cv_zero_ = *p.shrinkage_cv == 0.0;
      if (!cv_zero_) alpha_ = 1.0 / (*p.shrinkage_cv * *p.shrinkage_cv);
    }
  }

  double estimate(const Stats& st) const {
    if (loss_ != LossKind::Poisson) return st.s / st.w;
    if (!shrink_) return st.s / st.w;
    if (cv_zero_) return root_rate_;
    return (alpha_ + st.s) / (alpha_ / root_rate_ + st.w);
  }

  double deviance(const Stats& st, double mu) const {
    double d = 0.0;
    switch (loss_) {
      case LossKind::Poisson:
        d = 2.0 * (st.c - (st.s > 0.0 ? st.s * std::log(mu) : 0.0) - st.s + mu * st.w);
        break;
      case LossKind::Gamma: d = 2.0 * (st.w * std::log(mu) - st.c); break;
      case LossKind::SquaredError: d = st.c - mu * st.s; break;
    }
    return d > 0.0 ? d : 0.0;
  }

  double deviance(const Stats& st) const { return deviance(st, estimate(st)); }

  // Magnitude of the terms that cancel in deviance(); differences below a
  // tiny multiple of it are rounding noise.
  double scale(const Stats& st, double mu) const {
    switch (loss_) {
      case LossKind::Poisson: return std::abs(st.c) + st.s * (1.0 + std::abs(std::log(mu))) + mu * st.w;
      case LossKind::Gamma: return std::abs(st.c) + std::abs(st.w * std::log(mu));
      case LossKind::SquaredError: return std::abs(st.c);
    }
    return 0.0;
  }

 private:
  LossKind loss_;
  double root_rate_;
  bool shrink_ = false;
  bool cv_zero_ = false;
  double alpha_ = 0.0;
};

constexpr double kTieTolerance = 1e-12;
constexpr double kNoiseTolerance = 1e-10;

struct Candidate {
  bool found = false;
  std::int32_t feature = -1;
  double improvement = 0.0;
  // Numeric: codes <= cut_code go left. Categorical: left level codes.
  std::uint32_t cut_code = 0;
  double threshold = 0.0;
  std::vector<std::uint32_t> left_levels;
};

bool better(double improvement, const Candidate& best) {
  if (!best.found) return true;
  return improvement > best.improvement + kTieTolerance * std::abs(best.improvement);
}

double midpoint(double a, double b) {
  const double m = a + 0.5 * (b - a);
  return m < b ? m : a;
}

class Builder {
 public:
  Builder(const Schema& schema, const GrowthIndex& index,
          std::span<const double> y, std::span<const double> w, const TreeParams& params,
          std::uint64_t seed, std::vector<std::uint32_t> rows)
      : schema_(schema), index_(index), params_(params), rng_(seed), rows_(std::move(rows)),
        model_(params, 1.0) {
    const std::size_t n = index.rows();
    row_stats_.resize(n);
    for (std::size_t i = 0; i < n; ++i) row_stats_[i] = row_stats(y[i], w[i]);
    total_ = stats_of(0, rows_.size());
    if (params.loss == LossKind::Poisson) {
      root_rate_ = total_.s / total_.w;
    }
    model_ = NodeModel(params, root_rate_);
    min_child_ = params.kappa * static_cast<double>(rows_.size());
    std::size_t max_codes = 0;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      max_codes = std::max(max_codes, index.values(j).size());
    }
    hist_.assign(max_codes, Stats{});
    features_.resize(schema.size());
    std::iota(features_.begin(), features_.end(), 0u);
  }

  std::vector<TreeNode> build() {
    root_loss_ = model_.deviance(total_, root_prediction());
    grow(0, rows_.size(), total_, 0);
    return std::move(nodes_);
  }

 private:
  Stats row_stats(double y, double w) const {
    switch (params_.loss) {
      case LossKind::Poisson: return {w, y, y > 0.0 ? y * std::log(y / w) : 0.0, 1};
      case LossKind::Gamma: return {w, w * y, w * std::log(y), 1};
      case LossKind::SquaredError: return {w, w * y, w * y * y, 1};
    }
    return {};
  }

  Stats stats_of(std::size_t b, std::size_t e) const {
    Stats st;
    for (std::size_t k = b; k < e; ++k) st.add(row_stats_[rows_[k]]);
    return st;
  }

  double root_prediction() const {
    return params_.loss == LossKind::Poisson ? root_rate_ : total_.s / total_.w;
  }

  bool admissible(const Stats& left, const Stats& right) const {
    return static_cast<double>(left.n) >= min_child_ && static_cast<double>(right.n) >= min_child_ &&
           left.w > 0.0 && right.w > 0.0;
  }

  void consider(std::int32_t feature, const Stats& node, double node_dev, const Stats& left,
                Candidate& best, auto&& describe) {
    const Stats right = node.minus(left);
    if (!admissible(left, right)) return;
    const double improvement = node_dev - model_.deviance(left) - model_.deviance(right);
    if (better(improvement, best)) {
      best.found = true;
      best.feature = feature;
      best.improvement = improvement;
      describe(best);
    }
  }

  void scan_numeric(std::size_t j, std::size_t b, std::size_t e, const Stats& node,
                    double node_dev, Candidate& best) {
    const auto codes = index_.codes(j);
    const auto values = index_.values(j);
    const std::size_t n = e - b;
    const auto feature = static_cast<std::int32_t>(j);
    // Present codes in increasing order with their stats.
    groups_.clear();
    if (values.size() <= 4 * n) {
      std::uint32_t lo = std::numeric_limits<std::uint32_t>::max(), hi = 0;
      for (std::size_t k = b; k < e; ++k) {
        const std::uint32_t c = codes[rows_[k]];
        hist_[c].add(row_stats_[rows_[k]]);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
      for (std::uint32_t c = lo; c <= hi; ++c) {
        if (hist_[c].n > 0) {
          groups_.push_back({c, hist_[c]});
          hist_[c] = Stats{};
        }
      }
    } else {
      sorted_.clear();
      for (std::size_t k = b; k < e; ++k) sorted_.push_back({codes[rows_[k]], rows_[k]});
      std::sort(sorted_.begin(), sorted_.end());
      for (const auto& [c, r] : sorted_) {
        if (groups_.empty() || groups_.back().code != c) groups_.push_back({c, Stats{}});
        groups_.back().stats.add(row_stats_[r]);
      }
    }
    Stats left;
    for (std::size_t g = 0; g + 1 < groups_.size(); ++g) {
      left.add(groups_[g].stats);
      const std::uint32_t code = groups_[g].code;
      const std::uint32_t next = groups_[g + 1].code;
      consider(feature, node, node_dev, left, best, [&](Candidate& c) {
        c.cut_code = code;
        c.threshold = midpoint(values[code], values[next]);
        c.left_levels.clear();
      });
    }
  }

  void scan_categorical(std::size_t j, std::size_t b, std::size_t e, const Stats& node,
                        double node_dev, Candidate& best) {
    const auto codes = index_.codes(j);
    const auto& levels = schema_[j].levels;
    const auto feature = static_cast<std::int32_t>(j);
    for (std::size_t k = b; k < e; ++k) hist_[codes[rows_[k]]].add(row_stats_[rows_[k]]);
    groups_.clear();
    for (std::uint32_t c = 0; c < levels.size(); ++c) {
      if (hist_[c].n > 0) {
        groups_.push_back({c, hist_[c]});
        hist_[c] = Stats{};
      }
    }
    std::sort(groups_.begin(), groups_.end(), [&](const Group& a, const Group& g) {
      const double ma = a.stats.s / a.stats.w, mg = g.stats.s / g.stats.w;
      if (ma != mg) return ma < mg;
      return levels[a.code] < levels[g.code];
    });
    Stats left;
    for (std::size_t g = 0; g + 1 < groups_.size(); ++g) {
      left.add(groups_[g].stats);
      consider(feature, node, node_dev, left, best, [&](Candidate& c) {
        c.left_levels.clear();
        for (std::size_t q = 0; q <= g; ++q) c.left_levels.push_back(groups_[q].code);
        std::sort(c.left_levels.begin(), c.left_levels.end());
      });
    }
  }

  std::vector<std::uint32_t> candidate_features() {
    const std::size_t p = features_.size();
    if (params_.mtry == 0 || params_.mtry >= p) {
      std::vector<std::uint32_t> all(p);
      std::iota(all.begin(), all.end(), 0u);
      return all;
    }
    for (std::size_t k = 0; k < params_.mtry; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, p - 1);
      std::swap(features_[k], features_[pick(rng_)]);
    }
    std::vector<std::uint32_t> chosen(features_.begin(), features_.begin() + params_.mtry);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  std::int32_t grow(std::size_t b, std::size_t e, const Stats& st, int depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    const double mu = id == 0 ? root_prediction() : model_.estimate(st);
    const double dev = id == 0 ? root_loss_ : model_.deviance(st, mu);
    {
      TreeNode& node = nodes_.back();
      node.prediction = mu;
      node.weight = st.w;
      node.count = st.n;
      node.deviance = dev;
    }

    const bool depth_ok = !params_.max_depth || depth < *params_.max_depth;
    if (!depth_ok || static_cast<double>(st.n) < 2.0 * min_child_ || st.n < 2) return id;

    Candidate best;
    for (std::uint32_t j : candidate_features()) {
      if (schema_[j].categorical()) {
        scan_categorical(j, b, e, st, dev, best);
      } else {
        scan_numeric(j, b, e, st, dev, best);
      }
    }
    if (!best.found) return id;
    const double noise = kNoiseTolerance * model_.scale(st, mu);
    if (!(best.improvement > params_.cp * root_loss_) || !(best.improvement > noise)) return id;

    const auto codes = index_.codes(static_cast<std::size_t>(best.feature));
    const bool categorical = schema_[best.feature].categorical();
    auto goes_left = [&](std::uint32_t row) {
      const std::uint32_t c = codes[row];
      if (categorical) return std::binary_search(best.left_levels.begin(), best.left_levels.end(), c);
      return c <= best.cut_code;
    };
    const auto mid_it = std::stable_partition(rows_.begin() + b, rows_.begin() + e, goes_left);
    const std::size_t mid = static_cast<std::size_t>(mid_it - rows_.begin());
    const Stats left_stats = stats_of(b, mid);
    const Stats right_stats = stats_of(mid, e);

    {
      TreeNode& node = nodes_[id];
      node.feature = best.feature;
      node.threshold = categorical ? 0.0 : best.threshold;
      node.left_levels = categorical ? best.left_levels : std::vector<std::uint32_t>{};
      node.improvement = best.improvement;
    }
    const std::int32_t l = grow(b, mid, left_stats, depth + 1);
    const std::int32_t r = grow(mid, e, right_stats, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  struct Group {
    std::uint32_t code;
    Stats stats;
  };

  const Schema& schema_;
  const GrowthIndex& index_;
  const TreeParams& params_;
  Rng rng_;
  std::vector<std::uint32_t> rows_;
  NodeModel model_;
  std::vector<Stats> row_stats_;
  Stats total_;
  double root_rate_ = 0.0;
  double root_loss_ = 0.0;
  double min_child_ = 0.0;
  std::vector<Stats> hist_;
  std::vector<Group> groups_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> sorted_;
  std::vector<std::uint32_t> features_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

void TreeParams::validate(std::size_t features) const {
  if (!(cp >= 0.0 && cp <= 1.0)) throw std::invalid_argument("tree: cp must be in [0, 1]");
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("tree: kappa must be in (0, 1)");
  if (max_depth && *max_depth < 0) throw std::invalid_argument("tree: max_depth must be >= 0");
  if (shrinkage_cv && !(*shrinkage_cv >= 0.0)) {
    throw std::invalid_argument("tree: shrinkage cv must be non-negative");
  }
  if (mtry > features) throw std::invalid_argument("tree: mtry exceeds the number of features");
}

GrowthIndex::GrowthIndex(const Schema& schema, const FeatureMatrix& x) : rows_(x.rows()) {
  if (x.cols() != schema.size()) throw std::invalid_argument("tree: matrix does not match schema");
  codes_.resize(schema.size());
  values_.resize(schema.size());
  std::vector<double> column(x.rows());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    for (std::size_t i = 0; i < x.rows(); ++i) column[i] = x(i, j);
    auto& codes = codes_[j];
    auto& values = values_[j];
    codes.resize(x.rows());
    if (schema[j].categorical()) {
      values.resize(schema[j].levels.size());
      std::iota(values.begin(), values.end(), 0.0);
      for (std::size_t i = 0; i < x.rows(); ++i) codes[i] = static_cast<std::uint32_t>(column[i]);
      continue;
    }
    values = column;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      codes[i] = static_cast<std::uint32_t>(
          std::lower_bound(values.begin(), values.end(), column[i]) - values.begin());
    }
  }
}

TreeGrower::TreeGrower(const Schema& schema, const FeatureMatrix& x)
    : schema_(schema), x_(x), owned_(std::in_place, schema, x), index_(&*owned_) {}

TreeGrower::TreeGrower(const Schema& schema, const FeatureMatrix& x, const GrowthIndex& index)
    : schema_(schema), x_(x), index_(&index) {
  if (index.rows() != x.rows() || index.features() != schema.size()) {
    throw std::invalid_argument("tree: growth index does not match the matrix");
  }
}

Tree TreeGrower::grow(std::span<const double> response, std::span<const double> weight,
                      std::span<const std::uint32_t> rows, const TreeParams& params,
                      std::uint64_t seed) const {
  params.validate(schema_.size());
  if (rows.empty()) throw std::invalid_argument("tree: empty problem");
  if (response.size() != x_.rows() || weight.size() != x_.rows()) {
    throw std::invalid_argument("tree: response and weight must cover every matrix row");
  }
  for (std::uint32_t r : rows) {
    if (r >= x_.rows()) throw std::invalid_argument("tree: row index out of range");
  }
  Builder builder(schema_, *index_, response, weight, params, seed,
                  std::vector<std::uint32_t>(rows.begin(), rows.end()));
  return Tree(params.loss, schema_, builder.build());
}

Tree grow_tree(const RegressionProblem& problem, TreeParams params) {
  problem.validate();
  if (problem.size() == 0) throw std::invalid_argument("tree: empty problem");
  params.loss = problem.loss;
  std::vector<std::uint32_t> rows(problem.size());
  std::iota(rows.begin(), rows.end(), 0u);
  return TreeGrower(problem.schema, problem.x).grow(problem.response, problem.weight, rows, params);
}

std::vector<std::string> order_categorical_levels(LossKind loss, std::span<const std::string> levels,
                                                  std::span<const std::uint32_t> codes,
                                                  std::span<const double> y,
                                                  std::span<const double> w) {
  if (codes.size() != y.size() || codes.size() != w.size()) {
    throw std::invalid_argument("order levels: length mismatch");
  }
  std::vector<double> num(levels.size()), den(levels.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] >= levels.size()) throw std::invalid_argument("order levels: code out of range");
    num[codes[i]] += loss == LossKind::Poisson ? y[i] : w[i] * y[i];
    den[codes[i]] += w[i];
  }
  std::vector<std::size_t> order(levels.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t k : order) {
    if (!(den[k] > 0.0)) throw std::invalid_argument("order levels: empty level " + levels[k]);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = num[a] / den[a], mb = num[b] / den[b];
    if (ma != mb) return ma < mb;
    return levels[a] < levels[b];
  });
  std::vector<std::string> out;
  for (std::size_t k : order) out.push_back(levels[k]);
  return out;
}

}  // namespace freqsev
