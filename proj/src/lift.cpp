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

#include "freqsev/lift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "freqsev/csv.hpp"
#include "freqsev/error.hpp"

namespace freqsev {

using nlohmann::json;

namespace {

void check_models(const Model& frequency, const Model& severity) {
  if (!(frequency.schema() == severity.schema())) {
    throw std::invalid_argument("premium: frequency and severity schemas differ");
  }
  if (frequency.loss() != LossKind::Poisson) throw std::invalid_argument("premium: frequency model must be Poisson");
  if (severity.loss() != LossKind::Gamma) throw std::invalid_argument("premium: severity model must be gamma");
}

std::string cell(double v) { return std::isfinite(v) ? csv::format_double(v) : std::string(); }

}  // namespace

double technical_premium(const Model& frequency, const Model& severity, std::span<const double> x,
                         double exposure) {
  check_models(frequency, severity);
  return exposure * frequency.predict(x) * severity.predict(x);
}

std::vector<double> technical_premiums(const Model& frequency, const Model& severity,
                                       const Portfolio& portfolio) {
  check_models(frequency, severity);
  if (!(frequency.schema() == portfolio.schema())) throw std::invalid_argument("premium: portfolio schema differs");
  std::vector<double> out(portfolio.size());
  for (std::size_t i = 0; i < portfolio.size(); ++i) {
    const auto& r = portfolio[i];
    out[i] = r.expo * frequency.predict(r.features) * severity.predict(r.features);
  }
  return out;
}

std::vector<double> out_of_sample_premiums(const Portfolio& portfolio, const FoldAssignment& folds,
                                           std::span<const Model> frequency,
                                           std::span<const Model> severity) {
  if (folds.size() != portfolio.size()) throw DataError("premium: fold labels do not match the portfolio");
  const auto k = static_cast<std::size_t>(folds.k);
  if (frequency.size() != k || severity.size() != k) {
    throw std::invalid_argument("premium: one frequency and one severity model per fold");
  }
  for (std::size_t f = 0; f < k; ++f) check_models(frequency[f], severity[f]);
  std::vector<double> out(portfolio.size());
  for (std::size_t i = 0; i < portfolio.size(); ++i) {
    const int label = folds.labels[i];
    if (label < 1 || label > folds.k) throw DataError("premium: fold label out of range");
    const auto f = static_cast<std::size_t>(label - 1);
    const auto& r = portfolio[i];
    out[i] = r.expo * frequency[f].predict(r.features) * severity[f].predict(r.features);
  }
  return out;
}

std::vector<FoldReconciliation> reconcile(std::span<const double> premiums,
                                          std::span<const double> losses,
                                          const FoldAssignment& folds) {
  if (premiums.size() != losses.size() || premiums.size() != folds.size()) {
    throw std::invalid_argument("reconcile: length mismatch");
  }
  std::vector<FoldReconciliation> out(static_cast<std::size_t>(folds.k));
  for (int f = 1; f <= folds.k; ++f) out[static_cast<std::size_t>(f - 1)].fold = f;
  for (std::size_t i = 0; i < premiums.size(); ++i) {
    auto& r = out.at(static_cast<std::size_t>(folds.labels[i] - 1));
    r.premium += premiums[i];
    r.loss += losses[i];
  }
  for (auto& r : out) {
    r.ratio = r.loss > 0.0 ? r.premium / r.loss : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

void TariffComparison::validate() const {
  const std::size_t n = bench.size();
  if (comp.size() != n || loss.size() != n || exposure.size() != n) {
    throw DataError("tariffs: length mismatch");
  }
  if (n == 0) throw DataError("tariffs: no policies");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(bench[i] > 0.0) || !(comp[i] > 0.0) || !std::isfinite(bench[i]) || !std::isfinite(comp[i])) {
      throw DataError("tariffs: premiums must be positive at policy " + std::to_string(i));
    }
    if (!(loss[i] >= 0.0) || !std::isfinite(loss[i])) {
      throw DataError("tariffs: negative loss at policy " + std::to_string(i));
    }
    if (!(exposure[i] > 0.0) || !std::isfinite(exposure[i])) {
      throw DataError("tariffs: exposure must be positive at policy " + std::to_string(i));
    }
    if (!std::isfinite(relativity(i))) throw DataError("tariffs: relativity overflows at policy " + std::to_string(i));
  }
}

std::vector<std::size_t> relativity_order(const TariffComparison& cmp) {
  std::vector<std::size_t> order(cmp.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cmp.relativity(a) < cmp.relativity(b);
  });
  return order;
}

std::vector<std::size_t> equal_exposure_bins(std::span<const double> exposure,
                                             std::span<const std::size_t> order, std::size_t bins) {
  if (bins < 2) throw std::invalid_argument("bins: at least two bins");
  if (bins > order.size()) throw DataError("bins: more bins than policies");
  double total = 0.0;
  for (std::size_t i : order) total += exposure[i];
  if (!(total > 0.0)) throw DataError("bins: no exposure");
  const double slack = 1e-12 * total;

  std::vector<std::size_t> start{0};
  double cumulative = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    cumulative += exposure[order[k]];
    const std::size_t b = start.size();  // 1-based index of the open bin
    if (b < bins && cumulative + slack >= static_cast<double>(b) * total / static_cast<double>(bins)) {
      start.push_back(k + 1);
    }
  }
  if (start.size() < bins || start.back() == order.size()) {
    throw DataError("bins: exposure too concentrated, a bin is left empty");
  }
  start.push_back(order.size());
  return start;
}

LiftTable lift_table(const TariffComparison& cmp, std::size_t bins) {
  cmp.validate();
  const auto order = relativity_order(cmp);
  const auto start = equal_exposure_bins(cmp.exposure, order, bins);
  LiftTable t;
  for (std::size_t b = 0; b < bins; ++b) {
    LiftBin bin;
    bin.relativity_min = std::numeric_limits<double>::infinity();
    bin.relativity_max = -std::numeric_limits<double>::infinity();
    double r_sum = 0.0;
    for (std::size_t k = start[b]; k < start[b + 1]; ++k) {
      const std::size_t i = order[k];
      const double r = cmp.relativity(i);
      ++bin.policies;
      bin.exposure += cmp.exposure[i];
      bin.loss += cmp.loss[i];
      bin.bench_premium += cmp.bench[i];
      bin.comp_premium += cmp.comp[i];
      bin.relativity_min = std::min(bin.relativity_min, r);
      bin.relativity_max = std::max(bin.relativity_max, r);
      r_sum += r;
    }
    const auto n = static_cast<double>(bin.policies);
    bin.relativity_mean = r_sum / n;
    bin.loss_ratio = bin.loss / bin.bench_premium;
    bin.average_loss = bin.loss / n;
    bin.average_bench = bin.bench_premium / n;
    bin.average_comp = bin.comp_premium / n;
    bin.error_defined = bin.loss > 0.0;
    if (bin.error_defined) {
      bin.bench_error = bin.bench_premium / bin.loss - 1.0;
      bin.comp_error = bin.comp_premium / bin.loss - 1.0;
    } else {
      bin.bench_error = bin.comp_error = std::numeric_limits<double>::quiet_NaN();
    }
    t.bins.push_back(bin);
  }
  return t;
}

LiftTable loss_ratio_lift(const TariffComparison& cmp, std::size_t bins) { return lift_table(cmp, bins); }

LiftTable double_lift(const TariffComparison& cmp, std::size_t bins) { return lift_table(cmp, bins); }

void LiftTable::write_loss_ratio_csv(std::ostream& out) const {
  out << "bin,policies,exposure,relativity_min,relativity_max,relativity_mean,loss,bench_premium,"
         "loss_ratio\n";
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const LiftBin& x = bins[b];
    out << b + 1 << ',' << x.policies << ',' << cell(x.exposure) << ',' << cell(x.relativity_min)
        << ',' << cell(x.relativity_max) << ',' << cell(x.relativity_mean) << ',' << cell(x.loss)
        << ',' << cell(x.bench_premium) << ',' << cell(x.loss_ratio) << '\n';
  }
}

void LiftTable::write_double_lift_csv(std::ostream& out) const {
  out << "bin,policies,exposure,relativity_min,relativity_max,average_loss,average_bench,"
         "average_comp,bench_error,comp_error\n";
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const LiftBin& x = bins[b];
    // An undefined percentage error is left blank.
    out << b + 1 << ',' << x.policies << ',' << cell(x.exposure) << ',' << cell(x.relativity_min)
        << ',' << cell(x.relativity_max) << ',' << cell(x.average_loss) << ','
        << cell(x.average_bench) << ',' << cell(x.average_comp) << ','
        << (x.error_defined ? cell(x.bench_error) : "") << ','
        << (x.error_defined ? cell(x.comp_error) : "") << '\n';
  }
}

LorenzCurve ordered_lorenz(const TariffComparison& cmp, LorenzIntegration integration) {
  cmp.validate();
  const auto order = relativity_order(cmp);
  double total_loss = 0.0;
  double total_premium = 0.0;
  for (std::size_t i = 0; i < cmp.size(); ++i) {
    total_loss += cmp.loss[i];
    total_premium += cmp.bench[i];
  }
  if (!(total_loss > 0.0)) throw DataError("lorenz: no losses");
  if (!(total_premium > 0.0)) throw DataError("lorenz: no premium");

  LorenzCurve c;
  c.points.push_back({0.0, 0.0, 0.0});
  double cl = 0.0;
  double cp = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    cl += cmp.loss[i];
    cp += cmp.bench[i];
    const bool last_of_tie = k + 1 == order.size() || cmp.relativity(order[k + 1]) != cmp.relativity(i);
    if (last_of_tie) {
      c.points.push_back({std::min(1.0, cp / total_premium), std::min(1.0, cl / total_loss),
                          cmp.relativity(i)});
    }
  }
  c.points.back().premium_share = 1.0;
  c.points.back().loss_share = 1.0;

  double area = 0.0;
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    const auto& a = c.points[k - 1];
    const auto& b = c.points[k];
    const double dx = b.premium_share - a.premium_share;
    area += integration == LorenzIntegration::Trapezoid ? 0.5 * dx * (a.loss_share + b.loss_share)
                                                        : dx * a.loss_share;
  }
  c.gini = 200.0 * (0.5 - area);
  return c;
}

void LorenzCurve::write_csv(std::ostream& out) const {
  out << "relativity,premium_share,loss_share\n";
  for (const auto& p : points) {
    out << cell(p.relativity) << ',' << cell(p.premium_share) << ',' << cell(p.loss_share) << '\n';
  }
}

GiniMatrix gini_matrix(std::span<const std::string> names,
                       std::span<const std::vector<double>> premiums, std::span<const double> loss,
                       std::span<const double> exposure, LorenzIntegration integration) {
  if (names.size() != premiums.size()) throw std::invalid_argument("gini: one name per tariff");
  if (premiums.size() < 2) throw std::invalid_argument("gini: at least two tariffs");
  GiniMatrix m;
  m.names.assign(names.begin(), names.end());
  const std::size_t k = premiums.size();
  m.gini.assign(k, std::vector<double>(k, std::numeric_limits<double>::quiet_NaN()));
  m.row_max.assign(k, -std::numeric_limits<double>::infinity());
  for (std::size_t b = 0; b < k; ++b) {
    for (std::size_t c = 0; c < k; ++c) {
      if (b == c) continue;
      TariffComparison cmp{premiums[b], premiums[c], {loss.begin(), loss.end()},
                           {exposure.begin(), exposure.end()}};
      m.gini[b][c] = ordered_lorenz(cmp, integration).gini;
      m.row_max[b] = std::max(m.row_max[b], m.gini[b][c]);
    }
  }
  for (std::size_t b = 1; b < k; ++b) {
    if (m.row_max[b] < m.row_max[m.minimax]) m.minimax = b;
  }
  return m;
}

void GiniMatrix::write_csv(std::ostream& out) const {
  out << "benchmark";
  for (const auto& n : names) out << ',' << csv::escape(n);
  out << ",max\n";
  for (std::size_t b = 0; b < names.size(); ++b) {
    out << csv::escape(names[b]);
    for (double g : gini[b]) out << ',' << cell(g);
    out << ',' << cell(row_max[b]) << '\n';
  }
}

json GiniMatrix::to_json() const {
  json rows = json::array();
  for (std::size_t b = 0; b < names.size(); ++b) {
    json entries = json::object();
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (b != c) entries[names[c]] = gini[b][c];
    }
    rows.push_back({{"benchmark", names[b]}, {"gini", std::move(entries)}, {"max", row_max[b]}});
  }
  return {{"tariffs", names}, {"rows", std::move(rows)}, {"minimax", names[minimax]}};
}

}  // namespace freqsev
