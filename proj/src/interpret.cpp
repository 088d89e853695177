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

#include "freqsev/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "freqsev/csv.hpp"
#include "freqsev/parallel.hpp"
#include "freqsev/rng.hpp"

namespace freqsev {
namespace {

std::vector<std::size_t> resolve_rows(const FeatureMatrix& x, std::span<const std::size_t> rows) {
  std::vector<std::size_t> out;
  if (rows.empty()) {
    out.resize(x.rows());
    std::iota(out.begin(), out.end(), std::size_t{0});
  } else {
    out.assign(rows.begin(), rows.end());
    for (std::size_t r : out) {
      if (r >= x.rows()) throw std::invalid_argument("interpret: row out of range");
    }
  }
  if (out.empty()) throw std::invalid_argument("interpret: no observations");
  return out;
}

void check_schema(const Model& model, const FeatureMatrix& x) {
  if (x.cols() != model.schema().size()) throw std::invalid_argument("interpret: matrix does not match the schema");
}

void check_feature(const FeatureMatrix& x, std::size_t feature) {
  if (feature >= x.cols()) throw std::invalid_argument("interpret: feature out of range");
}

// Mean over `rows` of the prediction with `features` set to each row of
// `settings`, summed in row order.
std::vector<double> average_prediction(const Predictor& f, const FeatureMatrix& x,
                                       std::span<const std::size_t> rows,
                                       std::span<const std::size_t> features,
                                       const std::vector<std::vector<double>>& settings,
                                       std::size_t threads) {
  std::vector<double> out(settings.size());
  parallel_for(settings.size(), threads, [&](std::size_t s) {
    std::vector<double> buf(x.cols());
    double sum = 0.0;
    for (std::size_t r : rows) {
      const auto row = x.row(r);
      std::copy(row.begin(), row.end(), buf.begin());
      for (std::size_t j = 0; j < features.size(); ++j) buf[features[j]] = settings[s][j];
      sum += f(buf);
    }
    out[s] = sum / static_cast<double>(rows.size());
  });
  return out;
}

bool outside_range(const FeatureMatrix& x, std::span<const std::size_t> rows, std::size_t feature,
                   std::span<const double> grid) {
  double lo = x(rows.front(), feature);
  double hi = lo;
  for (std::size_t r : rows) {
    lo = std::min(lo, x(r, feature));
    hi = std::max(hi, x(r, feature));
  }
  return std::any_of(grid.begin(), grid.end(), [&](double v) { return v < lo || v > hi; });
}

// One-way dependence of feature k at each observation's own value.
std::vector<double> one_way_at_rows(const Predictor& f, const FeatureMatrix& x,
                                    std::span<const std::size_t> rows, std::size_t k,
                                    std::size_t threads) {
  std::map<double, std::size_t> index;
  for (std::size_t r : rows) index.emplace(x(r, k), 0);
  std::vector<std::vector<double>> settings;
  for (auto& [v, i] : index) {
    i = settings.size();
    settings.push_back({v});
  }
  const std::size_t fs[] = {k};
  const auto pd = average_prediction(f, x, rows, fs, settings, threads);
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = pd[index.at(x(rows[i], k))];
  return out;
}

std::vector<double> two_way_at_rows(const Predictor& f, const FeatureMatrix& x,
                                    std::span<const std::size_t> rows, std::size_t k,
                                    std::size_t l, std::size_t threads) {
  std::map<std::pair<double, double>, std::size_t> index;
  for (std::size_t r : rows) index.emplace(std::pair{x(r, k), x(r, l)}, 0);
  std::vector<std::vector<double>> settings;
  for (auto& [v, i] : index) {
    i = settings.size();
    settings.push_back({v.first, v.second});
  }
  const std::size_t fs[] = {k, l};
  const auto pd = average_prediction(f, x, rows, fs, settings, threads);
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = pd[index.at({x(rows[i], k), x(rows[i], l)})];
  return out;
}

void center(std::vector<double>& v) {
  double mean = 0.0;
  for (double a : v) mean += a;
  mean /= static_cast<double>(v.size());
  for (double& a : v) a -= mean;
}

HStatistic combine(std::size_t k, std::size_t l, std::vector<double> fk, std::vector<double> fl,
                   std::vector<double> fkl) {
  double raw = 0.0;
  for (double a : fkl) raw += a * a;
  center(fk);
  center(fl);
  center(fkl);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < fkl.size(); ++i) {
    const double d = fkl[i] - fk[i] - fl[i];
    num += d * d;
    den += fkl[i] * fkl[i];
  }
  HStatistic h{k, l, 0.0, false};
  if (!(den > 1e-20 * raw)) {
    h.degenerate = true;
    return h;
  }
  h.h = std::sqrt(num / den);
  return h;
}

void check_varies(const FeatureMatrix& x, std::span<const std::size_t> rows, std::size_t f) {
  const double v = x(rows.front(), f);
  for (std::size_t r : rows) {
    if (x(r, f) != v) return;
  }
  throw std::invalid_argument("interaction: feature " + std::to_string(f) + " is constant");
}

std::string grid_cell(const Schema& schema, std::size_t feature, double v) {
  return schema[feature].categorical() ? csv::escape(schema.decode(feature, v)) : csv::format_double(v);
}

}  // namespace

void ImportanceReport::write_csv(std::ostream& out) const {
  out << "feature,importance\n";
  for (std::size_t j = 0; j < features.size(); ++j) {
    out << csv::escape(features[j]) << ',' << csv::format_double(percent[j]) << '\n';
  }
}

ImportanceReport normalize_importance(const Schema& schema, std::span<const double> raw) {
  if (raw.size() != schema.size()) throw std::invalid_argument("importance: length mismatch");
  ImportanceReport r;
  double total = 0.0;
  for (double v : raw) {
    if (!(v >= 0.0)) throw std::invalid_argument("importance: negative improvement");
    total += v;
  }
  for (std::size_t j = 0; j < raw.size(); ++j) {
    r.features.push_back(schema[j].name);
    r.percent.push_back(total > 0.0 ? 100.0 * raw[j] / total : 0.0);
  }
  return r;
}

ImportanceReport variable_importance(const Model& model) {
  return normalize_importance(model.schema(), model.importance());
}

std::vector<double> default_grid(const Schema& schema, const FeatureMatrix& x, std::size_t feature,
                                 std::span<const std::size_t> rows, std::size_t max_points) {
  if (feature >= schema.size()) throw std::invalid_argument("grid: feature out of range");
  if (schema[feature].categorical()) {
    std::vector<double> out(schema[feature].levels.size());
    std::iota(out.begin(), out.end(), 0.0);
    return out;
  }
  if (max_points < 2) throw std::invalid_argument("grid: at least two points");
  const auto rs = resolve_rows(x, rows);
  std::vector<double> v;
  v.reserve(rs.size());
  for (std::size_t r : rs) v.push_back(x(r, feature));
  std::sort(v.begin(), v.end());
  std::vector<double> distinct = v;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() <= max_points) return distinct;
  std::vector<double> out;
  const double last = static_cast<double>(v.size() - 1);
  for (std::size_t q = 0; q < max_points; ++q) {
    const double h = last * static_cast<double>(q) / static_cast<double>(max_points - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    out.push_back(v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> sample_rows(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (count >= n) return all;
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

Predictor make_predictor(const Model& model, Scale scale) {
  if (scale == Scale::Response) return [&model](std::span<const double> x) { return model.predict(x); };
  return [&model](std::span<const double> x) { return model.predict_link(x); };
}

IceBundle ice(const Predictor& f, std::size_t feature, std::span<const double> grid,
              const FeatureMatrix& x, std::span<const std::size_t> rows, std::size_t threads) {
  check_feature(x, feature);
  if (grid.empty()) throw std::invalid_argument("ice: empty grid");
  IceBundle out;
  out.feature = feature;
  out.grid.assign(grid.begin(), grid.end());
  out.observations = resolve_rows(x, rows);
  out.extrapolated = outside_range(x, out.observations, feature, grid);
  out.values.assign(out.observations.size(), std::vector<double>(grid.size()));
  parallel_for(out.observations.size(), threads, [&](std::size_t i) {
    const auto row = x.row(out.observations[i]);
    std::vector<double> buf(row.begin(), row.end());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      buf[feature] = grid[g];
      out.values[i][g] = f(buf);
    }
  });
  return out;
}

IceBundle ice(const Model& model, std::size_t feature, std::span<const double> grid,
              const FeatureMatrix& x, std::span<const std::size_t> rows, Scale scale,
              std::size_t threads) {
  check_schema(model, x);
  IceBundle out = ice(make_predictor(model, scale), feature, grid, x, rows, threads);
  if (model.schema()[feature].categorical()) out.extrapolated = false;
  return out;
}

PdCurve partial_dependence(const IceBundle& ice) {
  PdCurve pd;
  pd.feature = ice.feature;
  pd.grid = ice.grid;
  pd.extrapolated = ice.extrapolated;
  pd.values.assign(ice.grid.size(), 0.0);
  for (std::size_t g = 0; g < ice.grid.size(); ++g) {
    double sum = 0.0;
    for (const auto& curve : ice.values) sum += curve[g];
    pd.values[g] = sum / static_cast<double>(ice.values.size());
  }
  return pd;
}

PdCurve partial_dependence(const Model& model, std::size_t feature, std::span<const double> grid,
                           const FeatureMatrix& x, std::span<const std::size_t> rows, Scale scale,
                           std::size_t threads) {
  return partial_dependence(ice(model, feature, grid, x, rows, scale, threads));
}

std::vector<GroupedCurve> grouped_partial_dependence(const Model& model, std::size_t feature,
                                                     std::size_t group_feature,
                                                     std::span<const double> grid,
                                                     const FeatureMatrix& x,
                                                     std::span<const std::size_t> rows,
                                                     std::size_t q, Scale scale,
                                                     std::size_t threads) {
  check_schema(model, x);
  check_feature(x, feature);
  check_feature(x, group_feature);
  if (q < 2) throw std::invalid_argument("grouped pd: at least two groups");
  const auto rs = resolve_rows(x, rows);
  const Schema& schema = model.schema();
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  if (schema[group_feature].categorical()) {
    std::map<double, std::vector<std::size_t>> by_level;
    for (std::size_t r : rs) by_level[x(r, group_feature)].push_back(r);
    if (by_level.size() > q) throw std::invalid_argument("grouped pd: more levels than groups");
    if (by_level.size() < 2) throw std::invalid_argument("grouped pd: a single level");
    for (auto& [v, members] : by_level) groups.emplace_back(schema.decode(group_feature, v), std::move(members));
  } else {
    if (rs.size() < q) throw std::invalid_argument("grouped pd: fewer rows than groups");
    std::vector<std::size_t> sorted = rs;
    std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
      return x(a, group_feature) < x(b, group_feature);
    });
    for (std::size_t g = 0; g < q; ++g) {
      const std::size_t b = g * sorted.size() / q;
      const std::size_t e = (g + 1) * sorted.size() / q;
      std::vector<std::size_t> members(sorted.begin() + static_cast<std::ptrdiff_t>(b),
                                       sorted.begin() + static_cast<std::ptrdiff_t>(e));
      const std::string label = "[" + csv::format_double(x(sorted[b], group_feature)) + ", " +
                                csv::format_double(x(sorted[e - 1], group_feature)) + "]";
      std::sort(members.begin(), members.end());
      groups.emplace_back(label, std::move(members));
    }
  }
  std::vector<GroupedCurve> out;
  for (auto& [label, members] : groups) {
    GroupedCurve g;
    g.label = label;
    g.rows = members.size();
    g.curve = partial_dependence(model, feature, grid, x, members, scale, threads);
    const double first = g.curve.values.front();
    for (double& v : g.curve.values) v -= first;
    out.push_back(std::move(g));
  }
  return out;
}

HStatistic h_statistic(const Predictor& f, std::size_t k, std::size_t l, const FeatureMatrix& x,
                       std::span<const std::size_t> rows, std::size_t threads) {
  check_feature(x, k);
  check_feature(x, l);
  if (k == l) throw std::invalid_argument("interaction: needs two distinct features");
  const auto rs = resolve_rows(x, rows);
  check_varies(x, rs, k);
  check_varies(x, rs, l);
  return combine(k, l, one_way_at_rows(f, x, rs, k, threads), one_way_at_rows(f, x, rs, l, threads),
                 two_way_at_rows(f, x, rs, k, l, threads));
}

HStatistic h_statistic(const Model& model, std::size_t k, std::size_t l, const FeatureMatrix& x,
                       std::span<const std::size_t> rows, Scale scale, std::size_t threads) {
  check_schema(model, x);
  return h_statistic(make_predictor(model, scale), k, l, x, rows, threads);
}

std::vector<HStatistic> h_statistics(const Model& model, const FeatureMatrix& x,
                                     std::span<const std::size_t> rows,
                                     std::span<const std::size_t> features, Scale scale,
                                     std::size_t threads) {
  std::vector<std::size_t> fs(features.begin(), features.end());
  if (fs.empty()) {
    fs.resize(model.schema().size());
    std::iota(fs.begin(), fs.end(), std::size_t{0});
  }
  check_schema(model, x);
  const Predictor f = make_predictor(model, scale);
  const auto rs = resolve_rows(x, rows);
  std::vector<std::vector<double>> one(fs.size());
  for (std::size_t a = 0; a < fs.size(); ++a) {
    check_feature(x, fs[a]);
    check_varies(x, rs, fs[a]);
    one[a] = one_way_at_rows(f, x, rs, fs[a], threads);
  }
  std::vector<HStatistic> out;
  for (std::size_t a = 0; a < fs.size(); ++a) {
    for (std::size_t b = a + 1; b < fs.size(); ++b) {
      out.push_back(combine(fs[a], fs[b], one[a], one[b],
                            two_way_at_rows(f, x, rs, fs[a], fs[b], threads)));
    }
  }
  return out;
}

void write_pd_csv(std::ostream& out, const Schema& schema, std::span<const PdCurve> curves,
                  std::span<const std::string> names) {
  if (names.size() != curves.size()) throw std::invalid_argument("pd csv: one name per curve");
  out << "curve,feature,grid,value\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const PdCurve& pd = curves[c];
    for (std::size_t g = 0; g < pd.grid.size(); ++g) {
      out << csv::escape(names[c]) << ',' << csv::escape(schema[pd.feature].name) << ','
          << grid_cell(schema, pd.feature, pd.grid[g]) << ',' << csv::format_double(pd.values[g])
          << '\n';
    }
  }
}

void write_ice_csv(std::ostream& out, const Schema& schema, const IceBundle& ice,
                   std::span<const std::string> ids) {
  out << "observation,feature,grid,value\n";
  for (std::size_t i = 0; i < ice.observations.size(); ++i) {
    const std::string obs = ids.empty() ? std::to_string(ice.observations[i])
                                        : csv::escape(ids[ice.observations[i]]);
    for (std::size_t g = 0; g < ice.grid.size(); ++g) {
      out << obs << ',' << csv::escape(schema[ice.feature].name) << ','
          << grid_cell(schema, ice.feature, ice.grid[g]) << ','
          << csv::format_double(ice.values[i][g]) << '\n';
    }
  }
}

void write_h_csv(std::ostream& out, const Schema& schema, std::span<const HStatistic> h) {
  out << "feature_1,feature_2,h,degenerate\n";
  for (const auto& s : h) {
    out << csv::escape(schema[s.k].name) << ',' << csv::escape(schema[s.l].name) << ','
        << csv::format_double(s.h) << ',' << (s.degenerate ? 1 : 0) << '\n';
  }
}

}  // namespace freqsev
