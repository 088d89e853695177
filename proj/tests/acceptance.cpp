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

// One pass/fail line per acceptance criterion. Arguments select criteria by
// number; no arguments runs them all. Exit status is 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "freqsev/data.hpp"
#include "freqsev/forest.hpp"
#include "freqsev/gbm.hpp"
#include "freqsev/interpret.hpp"
#include "freqsev/lift.hpp"
#include "freqsev/loss.hpp"
#include "freqsev/model.hpp"
#include "freqsev/simulate.hpp"
#include "freqsev/tree.hpp"
#include "freqsev/tune.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace freqsev {
namespace {

using V = std::vector<double>;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failures of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) messages_ += (messages_.empty() ? "" : "; ") + what;
  }
  Outcome done(const std::string& summary) const {
    if (failures_ == 0) return {true, summary + " (" + std::to_string(checks_) + " checks)"};
    return {false, std::to_string(failures_) + "/" + std::to_string(checks_) + " failed: " + messages_};
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::string messages_;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Richardson-extrapolated central difference.
double derivative(const std::function<double(double)>& f, double x) {
  const double h = 1e-3 * std::max(1.0, std::abs(x));
  auto d = [&](double s) { return (f(x + s) - f(x - s)) / (2 * s); };
  return (4 * d(h / 2) - d(h)) / 3;
}

Outcome deviance_correctness() {
  Check c;
  const double p = loss::poisson_deviance(V{0}, V{0.1}, V{1});
  c.expect(std::abs(p - 0.2) <= 1e-12, "poisson hand value " + num(p));
  const double g = loss::gamma_deviance(V{2}, V{1}, V{1});
  c.expect(std::abs(g - 2 * (1 - std::log(2.0))) <= 1e-12, "gamma hand value " + num(g));

  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> expo(0.05, 1), link(-4, 1);
  std::poisson_distribution<int> claims(0.8);
  std::gamma_distribution<double> amount(2, 600);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const bool poisson = i % 2 == 0;
    const LossKind kind = poisson ? LossKind::Poisson : LossKind::Gamma;
    const double y = poisson ? claims(rng) : amount(rng);
    const double w = poisson ? expo(rng) : 1 + claims(rng);
    const double f = poisson ? link(rng) : std::log(amount(rng));
    auto half = [&](double ff) { return 0.5 * loss::deviance(kind, V{y}, V{std::exp(ff)}, V{w}); };
    const double numeric = -derivative(half, f);
    const double grad = loss::negative_gradient(kind, V{y}, V{w}, V{f})[0];
    const double rel = std::abs(grad - numeric) / std::max(std::abs(grad), 1e-3);
    worst = std::max(worst, rel);
    c.expect(rel <= 1e-6, "gradient " + num(grad) + " vs " + num(numeric));
  }
  return c.done("hand values to 1e-12, worst gradient rel. error " + num(worst));
}

Outcome split_oracle() {
  Check c;
  std::size_t splits = 0;
  const LossKind losses[] = {LossKind::Poisson, LossKind::Gamma, LossKind::SquaredError};
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const LossKind loss = losses[seed % 3];
    const std::size_t n = 6 + seed % 25;  // 6..30
    const std::size_t numeric = seed % 4 == 0 ? 0 : 1 + seed % 3;
    const std::size_t cats = numeric == 3 ? 0 : std::min<std::size_t>(3 - numeric, 1 + seed % 2);
    const auto p = testing::random_problem(loss, n, numeric, cats, 2 + seed % 4, seed);
    TreeParams params;
    params.loss = loss;
    params.kappa = 0.1;
    params.max_depth = 1;
    const Tree t = grow_tree(p, params);
    const auto o = testing::brute_force_root_split(p, params.kappa, std::nullopt);
    const bool oracle_splits = o.found && o.delta > 0.0;
    const std::string tag = "seed " + std::to_string(seed);
    // A gain within rounding of zero may go either way.
    if (oracle_splits && o.delta <= 1e-9 * std::max(1.0, t.root_loss())) continue;
    c.expect(t.root().leaf() != oracle_splits, tag + " split presence");
    if (!oracle_splits || t.root().leaf()) continue;
    ++splits;
    const TreeNode& r = t.root();
    c.expect(static_cast<std::size_t>(r.feature) == o.feature, tag + " feature");
    c.expect(std::abs(r.improvement - o.delta) <= 1e-9 * std::max(1.0, o.delta), tag + " gain");
    if (o.left_levels.empty()) {
      bool same = true;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double v = p.x(i, o.feature);
        same = same && (v <= r.threshold) == (v <= o.threshold);
      }
      c.expect(same, tag + " partition");
    } else {
      c.expect(r.left_levels == o.left_levels, tag + " levels");
    }
  }
  return c.done("200 problems, " + std::to_string(splits) + " splits compared");
}

std::size_t leaf_depth(const Tree& t, std::size_t target) {
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{0, 0}};
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    if (n == target) return d;
    const auto& node = t.nodes()[n];
    if (!node.leaf()) {
      stack.push_back({static_cast<std::size_t>(node.left), d + 1});
      stack.push_back({static_cast<std::size_t>(node.right), d + 1});
    }
  }
  return 0;
}

Outcome cp_semantics() {
  Check c;
  const LossKind losses[] = {LossKind::Poisson, LossKind::Gamma, LossKind::SquaredError};
  std::size_t leaves_checked = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const LossKind loss = losses[seed % 3];
    const auto p = testing::random_problem(loss, 60 + 10 * (seed % 5), 2, 1, 3, seed);
    TreeParams params;
    params.loss = loss;
    params.kappa = 0.047;  // kappa * n never an integer here
    params.cp = 1.0;
    c.expect(grow_tree(p, params).nodes().size() == 1, "cp=1 not root only");

    params.cp = 0.0;
    if (seed % 2 == 0) params.max_depth = 3;
    const Tree t = grow_tree(p, params);
    for (std::size_t li = 0; li < t.nodes().size(); ++li) {
      if (!t.nodes()[li].leaf()) continue;
      if (params.max_depth && leaf_depth(t, li) == static_cast<std::size_t>(*params.max_depth)) continue;
      // Otherwise no admissible split of the leaf may reduce its loss.
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (t.leaf_of(p.x.row(i)) == li) rows.push_back(i);
      }
      const auto sub = testing::subset(p, rows);
      const double kappa = params.kappa * static_cast<double>(p.size()) / static_cast<double>(rows.size());
      const auto o = testing::brute_force_root_split(sub, kappa, std::nullopt);
      c.expect(!o.found || o.delta <= 1e-9 * std::max(1.0, t.root_loss()),
               "seed " + std::to_string(seed) + " leaf " + std::to_string(li) + " still splittable");
      ++leaves_checked;
    }
  }
  return c.done("cp=1 root only on 30 problems; " + std::to_string(leaves_checked) +
                " cp=0 leaves blocked by kappa or depth");
}

Outcome shrinkage_endpoints() {
  Check c;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> e(0.01, 1), rate(0.01, 0.5);
  std::poisson_distribution<int> n(0.5);
  for (int rep = 0; rep < 500; ++rep) {
    V claims, expo;
    const std::size_t size = 1 + rep % 40;
    for (std::size_t i = 0; i < size; ++i) {
      claims.push_back(n(rng));
      expo.push_back(e(rng));
    }
    const double root = rate(rng);
    c.expect(loss::poisson_node_estimate(claims, expo, loss::NodeShrinkage::with_cv(0.0, root)) == root,
             "gamma=0 is not the root rate");
    double sn = 0, se = 0;
    for (std::size_t i = 0; i < size; ++i) {
      sn += claims[i];
      se += expo[i];
    }
    c.expect(loss::poisson_node_estimate(claims, expo, loss::NodeShrinkage::disabled()) == sn / se,
             "disabled is not sum(N)/sum(e)");
  }
  // Through the tree: gamma = 0 pins every node at the root rate.
  const auto p = testing::random_problem(LossKind::Poisson, 400, 2, 1, 3, 8);
  TreeParams params;
  params.kappa = 0.05;
  params.shrinkage_cv = 0.0;
  const Tree t = grow_tree(p, params);
  for (const auto& node : t.nodes()) c.expect(node.prediction == t.root().prediction, "tree node moved");
  return c.done("500 random nodes and a tree");
}

Outcome forest_identity() {
  Check c;
  const auto sim = simulate_portfolio(SimulationConfig::mtpl(5000), 5);
  const auto p = frequency_view(sim.portfolio);
  ForestParams fp;
  fp.trees = 30;
  fp.mtry = 3;
  fp.kappa = 0.02;
  fp.seed = 77;
  const Forest f1 = fit_forest(p, fp, 1);
  for (std::size_t i = 0; i < p.size(); i += 7) {
    const auto x = p.x.row(i);
    double s = 0;
    for (const auto& t : f1.trees()) s += t.predict(x);
    c.expect(f1.predict(x) == s / static_cast<double>(f1.size()), "row " + std::to_string(i));
  }
  const std::string ref = f1.to_json().dump();
  for (std::size_t threads : {4u, 8u}) {
    c.expect(fit_forest(p, fp, threads).to_json().dump() == ref,
             std::to_string(threads) + " threads differ");
  }
  return c.done("mean of members bitwise; identical at 1, 4, 8 threads");
}

Outcome gbm_monotonicity() {
  Check c;
  const auto sim = simulate_portfolio(SimulationConfig::mtpl(10000), 6);
  const auto p = frequency_view(sim.portfolio);
  GbmParams gp;
  gp.trees = 500;
  gp.depth = 3;
  gp.shrinkage = 0.05;
  gp.delta = 1.0;
  gp.seed = 6;
  const Gbm g = fit_gbm(p, gp);
  const auto trace = g.staged_deviance();
  c.expect(trace.size() == 501, "trace length " + std::to_string(trace.size()));
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t < trace.size(); ++t) {
    worst = std::max(worst, trace[t] - trace[t - 1]);
    c.expect(trace[t] <= trace[t - 1] + 1e-10, "stage " + std::to_string(t) + " increased");
  }
  return c.done("500 stages, largest step change " + num(worst) + ", deviance " + num(trace.front()) +
                " -> " + num(trace.back()));
}

Outcome additivity() {
  Check c;
  const auto sim = simulate_portfolio(SimulationConfig::mtpl(20000), 7);
  const auto p = frequency_view(sim.portfolio);
  GbmParams gp;
  gp.trees = 200;
  gp.shrinkage = 0.1;
  gp.seed = 7;
  gp.depth = 1;
  const Model stumps(fit_gbm(p, gp));
  gp.depth = 3;
  const Model deep(fit_gbm(p, gp));
  const auto rows = sample_rows(p.size(), 300, 7);
  double worst = 0;
  for (const auto& h : h_statistics(stumps, p.x, rows, {}, Scale::Link, workers())) {
    worst = std::max(worst, h.h);
    c.expect(h.h < 0.01, p.schema[h.k].name + "x" + p.schema[h.l].name + " H=" + num(h.h));
  }
  const std::size_t lo = p.schema.index_of("long"), la = p.schema.index_of("lat");
  const auto pair = h_statistic(deep, lo, la, p.x, rows, Scale::Link, workers());
  c.expect(pair.h > 0.05, "d=3 long x lat H=" + num(pair.h));
  return c.done("d=1 max H " + num(worst) + " over 55 pairs; d=3 long x lat H " + num(pair.h));
}

Outcome pd_ice_identity() {
  Check c;
  const auto sim = simulate_portfolio(SimulationConfig::mtpl(3000), 8);
  const auto p = frequency_view(sim.portfolio);
  TreeParams tp;
  tp.cp = 1e-4;
  ForestParams fp;
  fp.trees = 20;
  fp.mtry = 3;
  fp.seed = 1;
  GbmParams gp;
  gp.trees = 50;
  gp.depth = 2;
  gp.shrinkage = 0.1;
  gp.seed = 2;
  const std::vector<Model> models = {Model(grow_tree(p, tp)), Model(fit_forest(p, fp)),
                                     Model(fit_gbm(p, gp))};
  const auto rows = sample_rows(p.size(), 500, 3);
  std::size_t points = 0;
  for (const auto& m : models) {
    for (std::size_t j = 0; j < p.schema.size(); ++j) {
      const auto grid = default_grid(p.schema, p.x, j, rows, 15);
      for (Scale s : {Scale::Response, Scale::Link}) {
        const IceBundle bundle = ice(m, j, grid, p.x, rows, s);
        const PdCurve pd = partial_dependence(m, j, grid, p.x, rows, s);
        for (std::size_t g = 0; g < grid.size(); ++g) {
          double sum = 0;
          for (const auto& curve : bundle.values) sum += curve[g];
          c.expect(pd.values[g] == sum / static_cast<double>(bundle.values.size()),
                   std::string(to_string(m.model_class())) + " " + p.schema[j].name);
          ++points;
        }
      }
    }
    const auto imp = variable_importance(m);
    double total = 0;
    for (double v : imp.percent) total += v;
    c.expect(std::abs(total - 100.0) <= 1e-9, "importance sums to " + num(total));
  }
  return c.done(std::to_string(points) + " grid points exact; importance sums to 100");
}

Outcome cv_scheme() {
  Check c;
  const auto sim = simulate_portfolio(SimulationConfig::mtpl(1200), 9);
  const auto p = frequency_view(sim.portfolio);
  const auto folds = stratified_folds(sim.portfolio, 6, 9);
  TuningGrid g = TuningGrid::defaults(ModelClass::Tree, LossKind::Poisson, p.schema.size());
  g.cp = {1e-3, 5e-3};
  g.shrinkage_cv = {0.25, 1.0};
  g.tree.kappa = 0.02;
  const CvReport r = run_cv(p, folds, g, 9);
  std::vector<int> seen(p.size(), 0);
  for (int k = 1; k <= 6; ++k) {
    for (auto i : folds.rows_in(k)) ++seen[i];
  }
  std::size_t once = 0;
  for (int s : seen) once += s == 1;
  c.expect(once == p.size(), "rows not tested exactly once");
  std::size_t tested = 0;
  for (const auto& f : r.folds) tested += f.test_rows;
  c.expect(tested == p.size(), "test rows do not cover the data");
  for (const auto& f : r.folds) {
    for (std::size_t pt = 0; pt < r.points.size(); ++pt) {
      double sum = 0;
      int count = 0;
      for (const auto& rec : r.records) {
        if (rec.test_fold == f.fold && rec.point == pt) {
          sum += rec.error;
          ++count;
        }
      }
      c.expect(count == 5 && f.validation_error[pt] == sum / 5.0,
               "fold " + std::to_string(f.fold) + " point " + std::to_string(pt) + " mean");
    }
  }
  const auto oracle = testing::loop_cv_tree(p, folds, g);
  for (std::size_t k = 0; k < 6; ++k) {
    c.expect(r.folds[k].winner == oracle[k].winner, "fold " + std::to_string(k + 1) + " winner");
  }
  return c.done("6 folds, 2x2 grid, loop oracle agrees");
}

Outcome lift_arithmetic() {
  Check c;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.5, 2);
  TariffComparison self;
  for (int i = 0; i < 1000; ++i) {
    self.bench.push_back(100 * u(rng));
    self.loss.push_back(i % 5 == 0 ? 800 * u(rng) : 0.0);
    self.exposure.push_back(u(rng) / 2);
  }
  self.comp = self.bench;
  c.expect(ordered_lorenz(self).gini == 0.0, "Gini(b,b) = " + num(ordered_lorenz(self).gini));

  TariffComparison hand;
  hand.bench = {5, 5, 5, 5};
  hand.comp = {2, 3, 6, 8};
  hand.loss = {0, 0, 10, 10};
  hand.exposure = {1, 1, 1, 1};
  const double gini = ordered_lorenz(hand).gini;
  const double oracle = testing::shoelace_gini(hand);
  c.expect(std::abs(gini - oracle) <= 1e-12, "hand Gini " + num(gini) + " vs " + num(oracle));

  TariffComparison exact = self;
  for (std::size_t i = 0; i < exact.size(); ++i) exact.loss[i] = 1 + static_cast<double>(i);
  exact.bench = exact.loss;
  for (const auto& bin : loss_ratio_lift(exact).bins) c.expect(bin.loss_ratio == 1.0, "loss ratio " + num(bin.loss_ratio));
  return c.done("Gini(b,b)=0; hand Gini " + num(gini) + " = shoelace " + num(oracle) + "; unit loss ratios");
}

// Frequency and severity cross-validation shared by the last two criteria.
struct Study {
  Portfolio portfolio;
  FoldAssignment folds;
  std::vector<CvReport> frequency;  // tree, forest, gbm
  std::vector<CvReport> severity;
  double frequency_seconds = 0;
};

TuningGrid study_grid(ModelClass cls, LossKind loss, std::size_t p) {
  TuningGrid g = TuningGrid::defaults(cls, loss, p);
  switch (cls) {
    case ModelClass::Tree:
      break;
    case ModelClass::Forest:
      g.trees = {100, 200, 300};
      g.mtry = {3};
      break;
    case ModelClass::Gbm:
      g.trees = {100, 200, 300, 400, 500};
      g.depth = {2, 3};
      g.gbm.shrinkage = 0.05;
      break;
  }
  return g;
}

Study& study() {
  static std::optional<Study> s;
  if (s) return *s;
  s.emplace();
  const auto sim = simulate_portfolio(SimulationConfig::mtpl(100000), 11);
  s->portfolio = sim.portfolio;
  s->folds = stratified_folds(s->portfolio, 6, 11);
  const auto freq = frequency_view(s->portfolio);
  const CvOptions options{.threads = workers(), .keep_models = true};
  const auto start = std::chrono::steady_clock::now();
  for (auto cls : {ModelClass::Tree, ModelClass::Forest, ModelClass::Gbm}) {
    s->frequency.push_back(run_cv(freq, s->folds, study_grid(cls, LossKind::Poisson, freq.schema.size()), 11, options));
  }
  s->frequency_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto sev = severity_view(s->portfolio);
  const auto sev_folds = s->folds.restrict(sev.source_rows);
  for (auto cls : {ModelClass::Tree, ModelClass::Forest, ModelClass::Gbm}) {
    s->severity.push_back(run_cv(sev, sev_folds, study_grid(cls, LossKind::Gamma, sev.schema.size()), 12, options));
  }
  return *s;
}

Outcome directional_reproduction() {
  Check c;
  const Study& s = study();
  std::string detail;
  for (std::size_t k = 0; k < 6; ++k) {
    const double tree = s.frequency[0].folds[k].test_error;
    const double forest = s.frequency[1].folds[k].test_error;
    const double gbm = s.frequency[2].folds[k].test_error;
    c.expect(gbm < forest && forest < tree,
             "fold " + std::to_string(k + 1) + ": gbm " + num(gbm) + " forest " + num(forest) + " tree " + num(tree));
    if (k == 0) detail = "fold 1 gbm " + num(gbm) + " < forest " + num(forest) + " < tree " + num(tree);
  }
  c.expect(s.frequency_seconds < 900, "cross-validation took " + num(s.frequency_seconds) + " s");
  return c.done(detail + "; CV " + num(s.frequency_seconds) + " s");
}

Outcome reconciliation() {
  Check c;
  const Study& s = study();
  const char* names[] = {"tree", "forest", "gbm"};
  std::vector<double> loss;
  for (const auto& r : s.portfolio.records()) loss.push_back(r.amount);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t m = 0; m < 3; ++m) {
    const auto premium = out_of_sample_premiums(s.portfolio, s.folds, s.frequency[m].models, s.severity[m].models);
    for (const auto& f : reconcile(premium, loss, s.folds)) {
      lo = std::min(lo, f.ratio);
      hi = std::max(hi, f.ratio);
      c.expect(f.ratio >= 0.95 && f.ratio <= 1.05,
               std::string(names[m]) + " fold " + std::to_string(f.fold) + " ratio " + num(f.ratio));
    }
  }
  return c.done("premium/loss in [" + num(lo) + ", " + num(hi) + "] over 3 methods x 6 folds");
}

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;  // 0: none
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace freqsev

int main(int argc, char** argv) {
  using namespace freqsev;
  const std::vector<Criterion> criteria = {
      {1, "deviance correctness", 1, deviance_correctness},
      {2, "split oracle", 30, split_oracle},
      {3, "cp semantics", 0, cp_semantics},
      {4, "shrinkage endpoints", 0, shrinkage_endpoints},
      {5, "forest identity", 0, forest_identity},
      {6, "gbm monotonicity", 120, gbm_monotonicity},
      {7, "additivity", 300, additivity},
      {8, "pd/ice identity", 0, pd_ice_identity},
      {9, "cv scheme", 0, cv_scheme},
      {10, "lift arithmetic", 0, lift_arithmetic},
      {11, "directional reproduction", 0, directional_reproduction},
      {12, "reconciliation", 0, reconciliation},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  bool all_pass = true;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && seconds >= c.limit_seconds) {
      o.pass = false;
      o.detail += "; over the " + std::to_string(static_cast<int>(c.limit_seconds)) + " s limit";
    }
    all_pass = all_pass && o.pass;
    std::printf("criterion %2d %s  %-24s %8.2fs  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, seconds,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
