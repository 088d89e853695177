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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "freqsev/csv.hpp"
#include "freqsev/error.hpp"
#include "freqsev/parallel.hpp"
#include "freqsev/rng.hpp"

namespace freqsev {

using nlohmann::json;

namespace {

template <typename T>
void require_axis(const std::vector<T>& axis, const char* name) {
  if (axis.empty()) throw std::invalid_argument(std::string("grid: empty axis ") + name);
}

std::vector<std::uint32_t> to_u32(std::span<const std::size_t> rows) {
  return {rows.begin(), rows.end()};
}

// Simplicity key: smaller compares simpler.
std::pair<double, double> complexity(ModelClass model_class, const GridPoint& p) {
  switch (model_class) {
    case ModelClass::Tree: return {-p.cp, 0.0};
    case ModelClass::Forest: return {static_cast<double>(p.trees), 0.0};
    case ModelClass::Gbm: return {static_cast<double>(p.trees), static_cast<double>(p.depth)};
  }
  return {0.0, 0.0};
}

std::size_t pick_winner(ModelClass model_class, std::span<const GridPoint> points,
                        std::span<const double> errors) {
  std::size_t best = 0;
  auto worse = [](double a, double b) { return std::isnan(a) ? !std::isnan(b) : a > b; };
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double a = errors[i];
    const double b = errors[best];
    if (worse(a, b)) continue;
    if (a == b || (std::isnan(a) && std::isnan(b))) {
      if (complexity(model_class, points[i]) < complexity(model_class, points[best])) best = i;
      continue;
    }
    best = i;
  }
  return best;
}

[[noreturn]] void rethrow_for_point(ModelClass model_class, const GridPoint& p) {
  const std::string where = "grid point " + p.to_json(model_class).dump() + ": ";
  try {
    throw;
  } catch (const DataError& e) {
    throw DataError(where + e.what());
  } catch (const UsageError& e) {
    throw UsageError(where + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(where + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(where + e.what());
  }
}

// Errors for a cp sweep from one tree grown at the smallest cp: a larger cp
// stops descent at the first split whose improvement does not exceed it.
void tree_cp_sweep(const Tree& tree, const RegressionProblem& problem,
                   std::span<const std::size_t> eval, std::span<const double> cps,
                   std::span<double> errors) {
  const auto nodes = tree.nodes();
  const double root_loss = tree.root_loss();
  std::vector<std::size_t> order(cps.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cps[a] > cps[b]; });

  std::vector<std::vector<std::size_t>> paths(eval.size());
  for (std::size_t i = 0; i < eval.size(); ++i) tree.path_of(problem.x.row(eval[i]), paths[i]);
  std::vector<std::size_t> depth(eval.size(), 0);
  std::vector<double> prediction(eval.size());
  for (std::size_t c : order) {
    const double threshold = cps[c] * root_loss;
    for (std::size_t i = 0; i < eval.size(); ++i) {
      const auto& path = paths[i];
      std::size_t& d = depth[i];
      while (d + 1 < path.size() && nodes[path[d]].improvement > threshold) ++d;
      prediction[i] = nodes[path[d]].prediction;
    }
    errors[c] = mean_deviance(problem, eval, prediction);
  }
}

}  // namespace

json GridPoint::to_json(ModelClass model_class) const {
  switch (model_class) {
    case ModelClass::Tree:
      return {{"cp", cp}, {"shrinkage_cv", shrinkage_cv ? json(*shrinkage_cv) : json(nullptr)}};
    case ModelClass::Forest: return {{"trees", trees}, {"mtry", mtry}};
    case ModelClass::Gbm: return {{"trees", trees}, {"depth", depth}};
  }
  return {};
}

std::vector<double> cp_mantissa_grid(int lo_exponent, int hi_exponent) {
  if (hi_exponent <= lo_exponent) throw std::invalid_argument("cp grid: empty exponent range");
  std::vector<double> out;
  for (int e = lo_exponent; e < hi_exponent; ++e) {
    for (int m = 10; m < 100; ++m) out.push_back(m * std::pow(10.0, e - 1));
  }
  out.push_back(std::pow(10.0, hi_exponent));
  return out;
}

void TuningGrid::validate(LossKind loss, std::size_t features) const {
  switch (model_class) {
    case ModelClass::Tree:
      require_axis(cp, "cp");
      for (double v : cp) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("grid: cp must be in [0, 1]");
      }
      if (!shrinkage_cv.empty() && loss != LossKind::Poisson) {
        throw std::invalid_argument("grid: shrinkage applies to Poisson trees only");
      }
      for (double v : shrinkage_cv) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw std::invalid_argument("grid: shrinkage cv must be non-negative");
        }
      }
      break;
    case ModelClass::Forest:
      require_axis(trees, "trees");
      require_axis(mtry, "mtry");
      for (std::size_t m : mtry) {
        if (m == 0 || m > features) throw std::invalid_argument("grid: mtry must be in 1..p");
      }
      break;
    case ModelClass::Gbm:
      require_axis(trees, "trees");
      require_axis(depth, "depth");
      for (int d : depth) {
        if (d < 1) throw std::invalid_argument("grid: depth must be at least 1");
      }
      break;
  }
  if (model_class != ModelClass::Tree) {
    for (std::size_t t : trees) {
      if (t == 0) throw std::invalid_argument("grid: trees must be positive");
    }
  }
  if (loss == LossKind::SquaredError) throw std::invalid_argument("grid: Poisson or gamma loss only");
  for (const auto& p : points()) {
    switch (model_class) {
      case ModelClass::Tree: tree_params(loss, p).validate(features); break;
      case ModelClass::Forest: forest_params(p, 0).validate(features); break;
      case ModelClass::Gbm: gbm_params(p, 0).validate(); break;
    }
  }
}

std::vector<GridPoint> TuningGrid::points() const {
  std::vector<GridPoint> out;
  GridPoint p;
  switch (model_class) {
    case ModelClass::Tree:
      for (double c : cp) {
        p.cp = c;
        if (shrinkage_cv.empty()) out.push_back(p);
        for (double g : shrinkage_cv) {
          p.shrinkage_cv = g;
          out.push_back(p);
        }
      }
      break;
    case ModelClass::Forest:
      for (std::size_t t : trees) {
        for (std::size_t m : mtry) {
          p.trees = t;
          p.mtry = m;
          out.push_back(p);
        }
      }
      break;
    case ModelClass::Gbm:
      for (std::size_t t : trees) {
        for (int d : depth) {
          p.trees = t;
          p.depth = d;
          out.push_back(p);
        }
      }
      break;
  }
  return out;
}

TreeParams TuningGrid::tree_params(LossKind loss, const GridPoint& p) const {
  TreeParams t = tree;
  t.loss = loss;
  t.cp = p.cp;
  t.shrinkage_cv = loss == LossKind::Poisson ? p.shrinkage_cv : std::nullopt;
  t.mtry = 0;
  return t;
}

ForestParams TuningGrid::forest_params(const GridPoint& p, std::uint64_t seed) const {
  ForestParams f = forest;
  f.trees = p.trees;
  f.mtry = p.mtry;
  f.seed = seed;
  return f;
}

GbmParams TuningGrid::gbm_params(const GridPoint& p, std::uint64_t seed) const {
  GbmParams g = gbm;
  g.trees = p.trees;
  g.depth = p.depth;
  g.seed = seed;
  return g;
}

Model TuningGrid::fit(const TreeGrower& grower, const RegressionProblem& problem,
                      std::span<const std::uint32_t> rows, const GridPoint& p,
                      std::uint64_t seed, std::size_t threads) const {
  try {
    switch (model_class) {
      case ModelClass::Tree:
        return Model(grower.grow(problem.response, problem.weight, rows,
                                 tree_params(problem.loss, p)));
      case ModelClass::Forest: return Model(fit_forest(grower, problem, rows, forest_params(p, seed), threads));
      case ModelClass::Gbm: return Model(fit_gbm(grower, problem, rows, gbm_params(p, seed)));
    }
  } catch (...) {
    rethrow_for_point(model_class, p);
  }
  throw std::logic_error("grid: unknown model class");
}

TuningGrid TuningGrid::defaults(ModelClass model_class, LossKind loss, std::size_t features) {
  TuningGrid g;
  g.model_class = model_class;
  g.tree.kappa = 0.01;
  g.forest.kappa = 0.01;
  g.forest.delta = 0.75;
  g.forest.cp = 0.0;
  g.gbm.kappa = 0.01;
  g.gbm.delta = 0.75;
  g.gbm.shrinkage = 0.01;
  switch (model_class) {
    case ModelClass::Tree:
      g.cp = cp_mantissa_grid();
      if (loss == LossKind::Poisson) {
        for (int e = -6; e <= 0; ++e) g.shrinkage_cv.push_back(std::ldexp(1.0, e));
      }
      break;
    case ModelClass::Forest:
      for (std::size_t t = 100; t <= 5000; t += 100) g.trees.push_back(t);
      for (std::size_t m = 1; m <= std::min<std::size_t>(11, features); ++m) g.mtry.push_back(m);
      break;
    case ModelClass::Gbm:
      for (std::size_t t = 100; t <= 5000; t += 100) g.trees.push_back(t);
      for (int d = 1; d <= 10; ++d) g.depth.push_back(d);
      break;
  }
  return g;
}

json TuningGrid::to_json() const {
  json j{{"model_class", freqsev::to_string(model_class)}};
  switch (model_class) {
    case ModelClass::Tree:
      j["cp"] = cp;
      j["shrinkage_cv"] = shrinkage_cv;
      j["kappa"] = tree.kappa;
      j["max_depth"] = tree.max_depth ? json(*tree.max_depth) : json(nullptr);
      break;
    case ModelClass::Forest: {
      j["trees"] = trees;
      j["mtry"] = mtry;
      json f = forest.to_json();
      f.erase("trees");
      f.erase("mtry");
      f.erase("seed");
      j["fixed"] = std::move(f);
      break;
    }
    case ModelClass::Gbm: {
      j["trees"] = trees;
      j["depth"] = depth;
      json g = gbm.to_json();
      g.erase("trees");
      g.erase("depth");
      g.erase("seed");
      j["fixed"] = std::move(g);
      break;
    }
  }
  return j;
}

TuningGrid TuningGrid::from_json(const json& j, LossKind loss, std::size_t features) {
  try {
    TuningGrid g = defaults(parse_model_class(j.at("model_class").get<std::string>()), loss, features);
    switch (g.model_class) {
      case ModelClass::Tree:
        if (j.contains("cp")) g.cp = j.at("cp").get<std::vector<double>>();
        if (j.contains("shrinkage_cv")) g.shrinkage_cv = j.at("shrinkage_cv").get<std::vector<double>>();
        if (j.contains("kappa")) g.tree.kappa = j.at("kappa").get<double>();
        if (j.contains("max_depth") && !j.at("max_depth").is_null()) {
          g.tree.max_depth = j.at("max_depth").get<int>();
        }
        break;
      case ModelClass::Forest:
        if (j.contains("trees")) g.trees = j.at("trees").get<std::vector<std::size_t>>();
        if (j.contains("mtry")) g.mtry = j.at("mtry").get<std::vector<std::size_t>>();
        if (j.contains("fixed")) {
          json f = g.forest.to_json();
          f.update(j.at("fixed"));
          g.forest = ForestParams::from_json(f);
        }
        break;
      case ModelClass::Gbm:
        if (j.contains("trees")) g.trees = j.at("trees").get<std::vector<std::size_t>>();
        if (j.contains("depth")) g.depth = j.at("depth").get<std::vector<int>>();
        if (j.contains("fixed")) {
          json f = g.gbm.to_json();
          f.update(j.at("fixed"));
          g.gbm = GbmParams::from_json(f);
        }
        break;
    }
    return g;
  } catch (const json::exception& e) {
    throw UsageError(std::string("grid: ") + e.what());
  }
}

double mean_deviance(const RegressionProblem& problem, std::span<const std::size_t> rows,
                     std::span<const double> prediction) {
  if (rows.size() != prediction.size()) throw std::invalid_argument("deviance: length mismatch");
  if (rows.empty()) throw std::invalid_argument("deviance: no rows");
  std::vector<double> y(rows.size());
  std::vector<double> w(rows.size());
  bool positive = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y[i] = problem.response[rows[i]];
    w[i] = problem.weight[rows[i]];
    positive = positive && prediction[i] > 0.0 && std::isfinite(prediction[i]);
  }
  const double n = static_cast<double>(rows.size());
  if (positive || problem.loss == LossKind::SquaredError) {
    return loss::deviance(problem.loss, y, prediction, w) / n;
  }
  // A zero mean is only finite against a zero Poisson count.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double mu = prediction[i];
    if (std::isnan(mu) || mu < 0.0) return std::numeric_limits<double>::quiet_NaN();
    if (mu == 0.0 && !(problem.loss == LossKind::Poisson && y[i] == 0.0)) {
      return std::numeric_limits<double>::infinity();
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (prediction[i] == 0.0) continue;
    const double one[] = {y[i]};
    const double mu[] = {prediction[i]};
    const double wi[] = {w[i]};
    total += loss::deviance(problem.loss, one, mu, wi);
  }
  return total / n;
}

std::vector<double> evaluate_grid(const TreeGrower& grower, const RegressionProblem& problem,
                                  std::span<const std::uint32_t> train,
                                  std::span<const std::size_t> eval, const TuningGrid& grid,
                                  std::span<const GridPoint> points, std::uint64_t seed) {
  std::vector<double> errors(points.size(), std::numeric_limits<double>::quiet_NaN());
  // Points sharing every axis but the swept one form a group.
  std::map<std::pair<double, std::size_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const GridPoint& p = points[i];
    switch (grid.model_class) {
      case ModelClass::Tree:
        groups[{p.shrinkage_cv ? *p.shrinkage_cv : -1.0, 0}].push_back(i);
        break;
      case ModelClass::Forest: groups[{0.0, p.mtry}].push_back(i); break;
      case ModelClass::Gbm: groups[{0.0, static_cast<std::size_t>(p.depth)}].push_back(i); break;
    }
  }

  for (const auto& [key, members] : groups) {
    GridPoint base = points[members.front()];
    if (grid.model_class == ModelClass::Tree) {
      std::vector<double> cps;
      for (std::size_t i : members) cps.push_back(points[i].cp);
      base.cp = *std::min_element(cps.begin(), cps.end());
      const Model m = grid.fit(grower, problem, train, base, seed);
      std::vector<double> out(cps.size());
      tree_cp_sweep(*m.tree(), problem, eval, cps, out);
      for (std::size_t c = 0; c < members.size(); ++c) errors[members[c]] = out[c];
      continue;
    }
    std::vector<std::size_t> sizes;
    for (std::size_t i : members) sizes.push_back(points[i].trees);
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    base.trees = sizes.back();
    const Model m = grid.fit(grower, problem, train, base, seed);
    const auto nested = grid.model_class == ModelClass::Forest
                            ? m.forest()->predict_nested(problem.x, sizes, eval)
                            : m.gbm()->predict_nested(problem.x, sizes, eval);
    std::vector<double> by_size(sizes.size());
    for (std::size_t s = 0; s < sizes.size(); ++s) by_size[s] = mean_deviance(problem, eval, nested[s]);
    for (std::size_t i : members) {
      const auto s = std::lower_bound(sizes.begin(), sizes.end(), points[i].trees) - sizes.begin();
      errors[i] = by_size[static_cast<std::size_t>(s)];
    }
  }
  return errors;
}

std::uint64_t cv_fit_seed(std::uint64_t seed, int k, int l) {
  return derive_seed(seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(l)});
}

CvReport run_cv(const RegressionProblem& problem, const FoldAssignment& folds,
                const TuningGrid& grid, std::uint64_t seed, const CvOptions& options) {
  problem.validate();
  grid.validate(problem.loss, problem.schema.size());
  if (folds.size() != problem.size()) throw DataError("cv: fold labels do not match the rows");
  if (folds.k < 3) throw std::invalid_argument("cv: at least 3 folds are needed");
  for (int label : folds.labels) {
    if (label < 1 || label > folds.k) throw DataError("cv: fold label out of range");
  }
  for (int f = 1; f <= folds.k; ++f) {
    if (folds.rows_in(f).empty()) throw DataError("cv: fold " + std::to_string(f) + " is empty");
  }

  const int K = folds.k;
  CvReport report;
  report.model_class = grid.model_class;
  report.loss = problem.loss;
  report.k = K;
  report.seed = seed;
  report.points = grid.points();
  const std::size_t P = report.points.size();

  const TreeGrower grower(problem.schema, problem.x);

  // Validation jobs (k, l) for l != k, in order, then one refit per k.
  struct Job {
    int k;
    int l;
  };
  std::vector<Job> jobs;
  for (int k = 1; k <= K; ++k) {
    for (int l = 1; l <= K; ++l) {
      if (l != k) jobs.push_back({k, l});
    }
  }
  std::vector<std::vector<double>> job_errors(jobs.size());
  parallel_for(jobs.size(), options.threads, [&](std::size_t j) {
    const auto [k, l] = jobs[j];
    const auto train = to_u32(folds.rows_not_in({k, l}));
    const auto eval = folds.rows_in(l);
    job_errors[j] = evaluate_grid(grower, problem, train, eval, grid, report.points,
                                  cv_fit_seed(seed, k, l));
  });

  report.folds.resize(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) {
    FoldResult& fold = report.folds[static_cast<std::size_t>(k - 1)];
    fold.fold = k;
    fold.validation_error.assign(P, 0.0);
    for (std::size_t p = 0; p < P; ++p) {
      double sum = 0.0;
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (jobs[j].k != k) continue;
        report.records.push_back({k, p, jobs[j].l, job_errors[j][p]});
        sum += job_errors[j][p];
      }
      fold.validation_error[p] = sum / static_cast<double>(K - 1);
    }
    fold.winner = pick_winner(grid.model_class, report.points, fold.validation_error);
  }

  std::vector<Model> models(static_cast<std::size_t>(K));
  parallel_for(static_cast<std::size_t>(K), options.threads, [&](std::size_t i) {
    const int k = static_cast<int>(i) + 1;
    FoldResult& fold = report.folds[i];
    const auto train = to_u32(folds.rows_not_in({k}));
    const auto test = folds.rows_in(k);
    models[i] = grid.fit(grower, problem, train, report.points[fold.winner], cv_fit_seed(seed, k, 0));
    std::vector<double> prediction(test.size());
    for (std::size_t r = 0; r < test.size(); ++r) prediction[r] = models[i].predict(problem.x.row(test[r]));
    fold.test_error = mean_deviance(problem, test, prediction);
    fold.test_rows = test.size();
  });
  if (options.keep_models) report.models = std::move(models);
  return report;
}

void CvReport::write_csv(std::ostream& out) const {
  out << "test_fold,point,";
  switch (model_class) {
    case ModelClass::Tree: out << "cp,shrinkage_cv"; break;
    case ModelClass::Forest: out << "trees,mtry"; break;
    case ModelClass::Gbm: out << "trees,depth"; break;
  }
  out << ",validation_fold,error\n";
  for (const auto& r : records) {
    const GridPoint& p = points[r.point];
    out << r.test_fold << ',' << r.point << ',';
    switch (model_class) {
      case ModelClass::Tree:
        out << csv::format_double(p.cp) << ','
            << (p.shrinkage_cv ? csv::format_double(*p.shrinkage_cv) : std::string());
        break;
      case ModelClass::Forest: out << p.trees << ',' << p.mtry; break;
      case ModelClass::Gbm: out << p.trees << ',' << p.depth; break;
    }
    out << ',' << r.validation_fold << ',' << csv::format_double(r.error) << '\n';
  }
}

json CvReport::summary() const {
  json fs = json::array();
  double weighted = 0.0;
  std::size_t rows = 0;
  for (const auto& f : folds) {
    fs.push_back({{"fold", f.fold},
                  {"winner", points[f.winner].to_json(model_class)},
                  {"winner_index", f.winner},
                  {"validation_error", f.validation_error[f.winner]},
                  {"test_error", f.test_error},
                  {"test_rows", f.test_rows}});
    weighted += f.test_error * static_cast<double>(f.test_rows);
    rows += f.test_rows;
  }
  return {{"model_class", freqsev::to_string(model_class)},
          {"loss", freqsev::to_string(loss)},
          {"k", k},
          {"seed", seed},
          {"grid_points", points.size()},
          {"folds", std::move(fs)},
          {"test_error", rows ? weighted / static_cast<double>(rows) : 0.0}};
}

}  // namespace freqsev
