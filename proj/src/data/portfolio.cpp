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
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

#include "freqsev/csv.hpp"
#include "freqsev/data.hpp"
#include "freqsev/error.hpp"

namespace freqsev {
namespace {

constexpr std::string_view kReserved[] = {"id", "expo", "nclaims", "amount"};

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

void validate_record(const Schema& schema, const PolicyRecord& r, const std::string& where) {
  if (!(r.expo > 0.0) || !std::isfinite(r.expo)) {
    throw DataError(where + "exposure must be in (0, 1], got " + csv::format_double(r.expo));
  }
  if (r.expo > 1.0) throw DataError(where + "exposure exceeds one year");
  if (r.nclaims < 0) throw DataError(where + "negative claim count");
  if (!(r.amount >= 0.0) || !std::isfinite(r.amount)) {
    throw DataError(where + "claim amount must be non-negative");
  }
  if (r.amount > 0.0 && r.nclaims == 0) {
    throw DataError(where + "positive claim amount with zero claims");
  }
  if (r.nclaims > 0 && r.amount == 0.0) {
    throw DataError(where + "claims reported with zero amount");
  }
  if (r.features.size() != schema.size()) throw DataError(where + "feature count mismatch");
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const double v = r.features[j];
    if (!std::isfinite(v)) throw DataError(where + "non-finite value for " + schema[j].name);
    if (schema[j].categorical()) {
      if (v < 0 || v != std::floor(v) || v >= static_cast<double>(schema[j].levels.size())) {
        throw DataError(where + "invalid level code for " + schema[j].name);
      }
    }
  }
}

}  // namespace

std::optional<std::uint32_t> FeatureSpec::level_index(std::string_view level) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == level) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

Schema::Schema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
  std::set<std::string> seen;
  for (const auto& f : features_) {
    if (f.name.empty()) throw DataError("schema: empty feature name");
    for (auto reserved : kReserved) {
      if (f.name == reserved) throw DataError("schema: reserved column name " + f.name);
    }
    if (!seen.insert(f.name).second) throw DataError("schema: duplicate feature " + f.name);
    if (!f.categorical() && !f.levels.empty()) {
      throw DataError("schema: continuous feature " + f.name + " declares levels");
    }
    std::set<std::string> levels(f.levels.begin(), f.levels.end());
    if (levels.size() != f.levels.size()) {
      throw DataError("schema: duplicate level in " + f.name);
    }
  }
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw UsageError("unknown feature: " + std::string(name));
}

double Schema::encode(std::size_t feature, std::string_view cell) const {
  const FeatureSpec& f = features_.at(feature);
  if (f.categorical()) {
    if (auto idx = f.level_index(cell)) return static_cast<double>(*idx);
    throw DataError("unknown level '" + std::string(cell) + "' for feature " + f.name);
  }
  try {
    return csv::parse_double(cell);
  } catch (const std::invalid_argument& e) {
    throw DataError("feature " + f.name + ": " + e.what());
  }
}

std::string Schema::decode(std::size_t feature, double value) const {
  const FeatureSpec& f = features_.at(feature);
  if (!f.categorical()) return csv::format_double(value);
  const auto idx = static_cast<std::size_t>(value);
  if (value < 0 || idx >= f.levels.size()) throw DataError("invalid level code for " + f.name);
  return f.levels[idx];
}

Schema Schema::mtpl() {
  auto cat = [](std::string name, std::vector<std::string> levels) {
    return FeatureSpec{std::move(name), FeatureKind::Categorical, std::move(levels)};
  };
  auto num = [](std::string name) { return FeatureSpec{std::move(name), FeatureKind::Continuous, {}}; };
  return Schema({
      cat("coverage", {"TPL", "TPL+", "TPL++"}),
      cat("fuel", {"gasoline", "diesel"}),
      cat("sex", {"male", "female"}),
      cat("use", {"private", "work"}),
      cat("fleet", {"no", "yes"}),
      num("ageph"),
      num("power"),
      num("agec"),
      num("bm"),
      num("long"),
      num("lat"),
  });
}

nlohmann::json Schema::to_json() const {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : features_) {
    nlohmann::json entry{{"name", f.name},
                         {"kind", f.categorical() ? "categorical" : "continuous"}};
    if (f.categorical()) entry["levels"] = f.levels;
    features.push_back(std::move(entry));
  }
  return {{"features", std::move(features)}};
}

Schema Schema::from_json(const nlohmann::json& j) {
  try {
    std::vector<FeatureSpec> features;
    for (const auto& entry : j.at("features")) {
      FeatureSpec f;
      f.name = entry.at("name").get<std::string>();
      const auto kind = entry.at("kind").get<std::string>();
      if (kind == "categorical") {
        f.kind = FeatureKind::Categorical;
        if (entry.contains("levels")) f.levels = entry.at("levels").get<std::vector<std::string>>();
      } else if (kind == "continuous") {
        f.kind = FeatureKind::Continuous;
      } else {
        throw DataError("schema: unknown feature kind '" + kind + "'");
      }
      features.push_back(std::move(f));
    }
    return Schema(std::move(features));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("schema: ") + e.what());
  }
}

Portfolio::Portfolio(Schema schema, std::vector<PolicyRecord> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    validate_record(schema_, records_[i], "record " + std::to_string(i + 1) + ": ");
  }
}

Portfolio read_portfolio(std::istream& in, const Schema& declared) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw DataError("portfolio: missing header row");

  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < header->size(); ++c) {
    if (!column.emplace((*header)[c], c).second) {
      throw DataError("portfolio: duplicate column " + (*header)[c]);
    }
  }
  auto require = [&](const std::string& name) {
    auto it = column.find(name);
    if (it == column.end()) throw DataError("portfolio: missing column " + name);
    return it->second;
  };
  const std::size_t c_id = require("id");
  const std::size_t c_expo = require("expo");
  const std::size_t c_nclaims = require("nclaims");
  const std::size_t c_amount = require("amount");
  std::vector<std::size_t> c_feature;
  for (const auto& f : declared.features()) c_feature.push_back(require(f.name));

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;
  while (auto fields = reader.next()) {
    if (fields->size() != header->size()) {
      throw DataError(line_prefix(reader.line()) + "expected " + std::to_string(header->size()) +
                      " fields, got " + std::to_string(fields->size()));
    }
    rows.push_back(std::move(*fields));
    lines.push_back(reader.line());
  }

  // Categorical features declared without levels take the observed levels.
  std::vector<FeatureSpec> specs(declared.features().begin(), declared.features().end());
  for (std::size_t j = 0; j < specs.size(); ++j) {
    if (!specs[j].categorical() || !specs[j].levels.empty()) continue;
    std::set<std::string> observed;
    for (const auto& r : rows) observed.insert(r[c_feature[j]]);
    specs[j].levels.assign(observed.begin(), observed.end());
  }
  Schema schema(std::move(specs));

  std::vector<PolicyRecord> records;
  records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = line_prefix(lines[i]);
    PolicyRecord rec;
    rec.id = r[c_id];
    try {
      rec.expo = csv::parse_double(r[c_expo]);
      const double n = csv::parse_double(r[c_nclaims]);
      if (n != std::floor(n)) throw DataError("claim count is not an integer");
      rec.nclaims = static_cast<std::int64_t>(n);
      rec.amount = csv::parse_double(r[c_amount]);
      rec.features.resize(schema.size());
      for (std::size_t j = 0; j < schema.size(); ++j) {
        rec.features[j] = schema.encode(j, r[c_feature[j]]);
      }
    } catch (const std::invalid_argument& e) {
      throw DataError(where + e.what());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    if (rec.expo > 1.0) rec.expo = 1.0;
    validate_record(schema, rec, where);
    records.push_back(std::move(rec));
  }
  return Portfolio(std::move(schema), std::move(records));
}

Portfolio load_portfolio(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open portfolio file " + path.string());
  return read_portfolio(in, schema);
}

void write_portfolio(std::ostream& out, const Portfolio& portfolio) {
  const Schema& schema = portfolio.schema();
  out << "id,expo,nclaims,amount";
  for (const auto& f : schema.features()) out << ',' << csv::escape(f.name);
  out << '\n';
  for (const auto& r : portfolio.records()) {
    out << csv::escape(r.id) << ',' << csv::format_double(r.expo) << ',' << r.nclaims << ','
        << csv::format_double(r.amount);
    for (std::size_t j = 0; j < schema.size(); ++j) {
      out << ',' << csv::escape(schema.decode(j, r.features[j]));
    }
    out << '\n';
  }
}

void FeatureMatrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw std::invalid_argument("feature matrix: row width mismatch");
  values_.insert(values_.end(), values.begin(), values.end());
  ++rows_;
}

FeatureMatrix feature_matrix(const Portfolio& portfolio) {
  FeatureMatrix x(portfolio.size(), portfolio.schema().size());
  for (std::size_t i = 0; i < portfolio.size(); ++i) {
    std::ranges::copy(portfolio[i].features, x.row(i).begin());
  }
  return x;
}

void RegressionProblem::validate() const {
  const std::size_t n = response.size();
  if (n == 0) throw DataError("empty problem");
  if (weight.size() != n || x.rows() != n || source_rows.size() != n) {
    throw DataError("problem: inconsistent row counts");
  }
  if (x.cols() != schema.size()) throw DataError("problem: feature count mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weight[i] > 0.0) || !std::isfinite(weight[i])) {
      throw DataError("problem row " + std::to_string(i + 1) + ": non-positive weight");
    }
    if (!std::isfinite(response[i])) {
      throw DataError("problem row " + std::to_string(i + 1) + ": non-finite response");
    }
    if (loss == LossKind::Gamma && !(response[i] > 0.0)) {
      throw DataError("problem row " + std::to_string(i + 1) + ": non-positive severity");
    }
    if (loss == LossKind::Poisson && response[i] < 0.0) {
      throw DataError("problem row " + std::to_string(i + 1) + ": negative claim count");
    }
  }
}

RegressionProblem frequency_view(const Portfolio& portfolio) {
  if (portfolio.empty()) throw DataError("empty problem");
  RegressionProblem p;
  p.loss = LossKind::Poisson;
  p.schema = portfolio.schema();
  p.x = feature_matrix(portfolio);
  p.response.reserve(portfolio.size());
  p.weight.reserve(portfolio.size());
  for (std::size_t i = 0; i < portfolio.size(); ++i) {
    p.response.push_back(static_cast<double>(portfolio[i].nclaims));
    p.weight.push_back(portfolio[i].expo);
    p.source_rows.push_back(i);
  }
  p.validate();
  return p;
}

RegressionProblem severity_view(const Portfolio& portfolio) {
  RegressionProblem p;
  p.loss = LossKind::Gamma;
  p.schema = portfolio.schema();
  p.x = FeatureMatrix(0, portfolio.schema().size());
  for (std::size_t i = 0; i < portfolio.size(); ++i) {
    const auto& r = portfolio[i];
    if (r.nclaims == 0) continue;
    const double n = static_cast<double>(r.nclaims);
    p.response.push_back(r.amount / n);
    p.weight.push_back(n);
    p.x.append_row(r.features);
    p.source_rows.push_back(i);
  }
  if (p.response.empty()) throw DataError("severity view: portfolio has no claims");
  p.validate();
  return p;
}

}  // namespace freqsev
