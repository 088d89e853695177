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

#include "freqsev/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "freqsev/error.hpp"
#include "freqsev/rng.hpp"

namespace freqsev {
namespace {

using Kind = SurfaceTerm::Kind;
using nlohmann::json;

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::Linear: return "linear";
    case Kind::Quadratic: return "quadratic";
    case Kind::Step: return "step";
    case Kind::Level: return "level";
    case Kind::Product: return "product";
  }
  return "linear";
}

Kind parse_kind(const std::string& s) {
  if (s == "linear") return Kind::Linear;
  if (s == "quadratic") return Kind::Quadratic;
  if (s == "step") return Kind::Step;
  if (s == "level") return Kind::Level;
  if (s == "product") return Kind::Product;
  throw UsageError("simulation: unknown surface term kind '" + s + "'");
}

json surface_to_json(const Surface& s) {
  json terms = json::array();
  for (const auto& t : s.terms) {
    json j{{"kind", kind_name(t.kind)}, {"feature", t.feature}, {"coef", t.coef}};
    switch (t.kind) {
      case Kind::Linear:
      case Kind::Quadratic:
        j["center"] = t.center;
        j["scale"] = t.scale;
        break;
      case Kind::Step: j["threshold"] = t.threshold; break;
      case Kind::Level: j["level"] = t.level; break;
      case Kind::Product:
        j["center"] = t.center;
        j["scale"] = t.scale;
        j["feature2"] = t.feature2;
        j["center2"] = t.center2;
        j["scale2"] = t.scale2;
        break;
    }
    terms.push_back(std::move(j));
  }
  return {{"intercept", s.intercept}, {"terms", std::move(terms)}};
}

Surface surface_from_json(const json& j) {
  Surface s;
  s.intercept = j.at("intercept").get<double>();
  for (const auto& t : j.value("terms", json::array())) {
    SurfaceTerm term;
    term.kind = parse_kind(t.at("kind").get<std::string>());
    term.feature = t.at("feature").get<std::string>();
    term.coef = t.at("coef").get<double>();
    term.center = t.value("center", 0.0);
    term.scale = t.value("scale", 1.0);
    term.threshold = t.value("threshold", 0.0);
    term.level = t.value("level", std::string());
    term.feature2 = t.value("feature2", std::string());
    term.center2 = t.value("center2", 0.0);
    term.scale2 = t.value("scale2", 1.0);
    s.terms.push_back(std::move(term));
  }
  return s;
}

void validate_surface(const Surface& s, const Schema& schema, const char* which) {
  const std::string where = std::string("simulation: ") + which + " surface: ";
  if (!std::isfinite(s.intercept)) throw UsageError(where + "non-finite intercept");
  for (const auto& t : s.terms) {
    if (!std::isfinite(t.coef) || !std::isfinite(t.center) || !std::isfinite(t.center2) ||
        !std::isfinite(t.threshold)) {
      throw UsageError(where + "non-finite coefficient for " + t.feature);
    }
    if (!(t.scale != 0.0) || !std::isfinite(t.scale) || !(t.scale2 != 0.0) ||
        !std::isfinite(t.scale2)) {
      throw UsageError(where + "zero or non-finite scale for " + t.feature);
    }
    const auto f = schema.find(t.feature);
    if (!f) throw UsageError(where + "unknown feature " + t.feature);
    const bool categorical = schema[*f].categorical();
    if (t.kind == Kind::Level) {
      if (!categorical || !schema[*f].level_index(t.level)) {
        throw UsageError(where + "unknown level '" + t.level + "' for " + t.feature);
      }
    } else if (categorical) {
      throw UsageError(where + "numeric term on categorical feature " + t.feature);
    }
    if (t.kind == Kind::Product) {
      const auto f2 = schema.find(t.feature2);
      if (!f2 || schema[*f2].categorical()) {
        throw UsageError(where + "product term needs a continuous feature2");
      }
    }
  }
}

}  // namespace

BoundSurface::BoundSurface(const Surface& surface, const Schema& schema)
    : intercept_(surface.intercept) {
  for (const auto& t : surface.terms) {
    Term b{t.kind, schema.index_of(t.feature), 0, 0.0, t.coef, t.center, t.scale,
           t.center2, t.scale2, t.threshold};
    if (t.kind == Kind::Product) b.feature2 = schema.index_of(t.feature2);
    if (t.kind == Kind::Level) {
      const auto idx = schema[b.feature].level_index(t.level);
      if (!idx) throw UsageError("surface: unknown level " + t.level);
      b.level = static_cast<double>(*idx);
    }
    terms_.push_back(b);
  }
}

double BoundSurface::operator()(std::span<const double> x) const {
  double eta = intercept_;
  for (const auto& t : terms_) {
    const double u = (x[t.feature] - t.center) / t.scale;
    switch (t.kind) {
      case Kind::Linear: eta += t.coef * u; break;
      case Kind::Quadratic: eta += t.coef * u * u; break;
      case Kind::Step: eta += x[t.feature] > t.threshold ? t.coef : 0.0; break;
      case Kind::Level: eta += x[t.feature] == t.level ? t.coef : 0.0; break;
      case Kind::Product: eta += t.coef * u * ((x[t.feature2] - t.center2) / t.scale2); break;
    }
  }
  return eta;
}

Schema SimulationConfig::schema() const {
  std::vector<FeatureSpec> specs;
  for (const auto& g : features) {
    specs.push_back({g.name, g.kind, g.kind == FeatureKind::Categorical ? g.levels
                                                                        : std::vector<std::string>{}});
  }
  try {
    return Schema(std::move(specs));
  } catch (const DataError& e) {
    throw UsageError(std::string("simulation: ") + e.what());
  }
}

void SimulationConfig::validate() const {
  if (n == 0) throw UsageError("simulation: n must be positive");
  if (!(full_year_share >= 0.0 && full_year_share <= 1.0)) {
    throw UsageError("simulation: full_year_share must be in [0, 1]");
  }
  if (!(min_exposure > 0.0 && min_exposure <= 1.0)) {
    throw UsageError("simulation: min_exposure must be in (0, 1]");
  }
  if (!(severity_shape > 0.0) || !std::isfinite(severity_shape)) {
    throw UsageError("simulation: severity_shape must be positive");
  }
  for (const auto& g : features) {
    if (g.kind == FeatureKind::Categorical) {
      if (g.levels.empty() || g.levels.size() != g.probabilities.size()) {
        throw UsageError("simulation: " + g.name + " needs one probability per level");
      }
      double total = 0.0;
      for (double p : g.probabilities) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw UsageError("simulation: bad probability");
        total += p;
      }
      if (!(total > 0.0)) throw UsageError("simulation: probabilities of " + g.name + " sum to 0");
    } else {
      if (!std::isfinite(g.lo) || !std::isfinite(g.hi) || !(g.lo <= g.hi)) {
        throw UsageError("simulation: bad range for " + g.name);
      }
      if (!(g.step >= 0.0) || !std::isfinite(g.step)) {
        throw UsageError("simulation: bad step for " + g.name);
      }
      if (g.distribution == FeatureGenerator::Distribution::Normal &&
          (!(g.sd > 0.0) || !std::isfinite(g.mean) || !std::isfinite(g.sd))) {
        throw UsageError("simulation: bad normal parameters for " + g.name);
      }
    }
  }
  const Schema s = schema();
  validate_surface(frequency, s, "frequency");
  validate_surface(severity, s, "severity");
}

SimulationConfig SimulationConfig::mtpl(std::size_t n) {
  using D = FeatureGenerator::Distribution;
  auto cat = [](std::string name, std::vector<std::string> levels, std::vector<double> probs) {
    FeatureGenerator g;
    g.name = std::move(name);
    g.kind = FeatureKind::Categorical;
    g.levels = std::move(levels);
    g.probabilities = std::move(probs);
    return g;
  };
  auto num = [](std::string name, D dist, double lo, double hi, double mean, double sd,
                bool integer, double step = 0.0) {
    FeatureGenerator g;
    g.name = std::move(name);
    g.distribution = dist;
    g.lo = lo;
    g.hi = hi;
    g.mean = mean;
    g.sd = sd;
    g.integer = integer;
    g.step = step;
    return g;
  };
  auto term = [](Kind kind, std::string feature, double coef) {
    SurfaceTerm t;
    t.kind = kind;
    t.feature = std::move(feature);
    t.coef = coef;
    return t;
  };
  auto scaled = [&](Kind kind, std::string feature, double coef, double center, double scale) {
    SurfaceTerm t = term(kind, std::move(feature), coef);
    t.center = center;
    t.scale = scale;
    return t;
  };
  auto step = [&](std::string feature, double threshold, double coef) {
    SurfaceTerm t = term(Kind::Step, std::move(feature), coef);
    t.threshold = threshold;
    return t;
  };
  auto level = [&](std::string feature, std::string lvl, double coef) {
    SurfaceTerm t = term(Kind::Level, std::move(feature), coef);
    t.level = std::move(lvl);
    return t;
  };

  SimulationConfig c;
  c.n = n;
  c.features = {
      cat("coverage", {"TPL", "TPL+", "TPL++"}, {0.6, 0.25, 0.15}),
      cat("fuel", {"gasoline", "diesel"}, {0.7, 0.3}),
      cat("sex", {"male", "female"}, {0.75, 0.25}),
      cat("use", {"private", "work"}, {0.95, 0.05}),
      cat("fleet", {"no", "yes"}, {0.97, 0.03}),
      num("ageph", D::Normal, 18, 95, 47, 15, true),
      num("power", D::Normal, 20, 200, 60, 20, true),
      num("agec", D::Normal, 0, 40, 7, 4, true),
      num("bm", D::Normal, 0, 22, 1, 4, true),
      // Postal district centroids on a lattice.
      num("long", D::Uniform, 2.6, 6.4, 0, 1, false, 0.05),
      num("lat", D::Uniform, 49.5, 51.5, 0, 1, false, 0.025),
  };

  SurfaceTerm latlong = scaled(Kind::Product, "long", 0.25, 4.5, 1.0);
  latlong.feature2 = "lat";
  latlong.center2 = 50.5;
  latlong.scale2 = 0.5;
  c.frequency.intercept = std::log(0.12);
  c.frequency.terms = {
      scaled(Kind::Quadratic, "ageph", 0.30, 45, 20),
      scaled(Kind::Linear, "ageph", -0.20, 45, 20),
      scaled(Kind::Linear, "bm", 0.60, 0, 10),
      step("bm", 10, 0.15),
      scaled(Kind::Linear, "power", 0.15, 70, 40),
      step("agec", 12, -0.10),
      latlong,
      level("coverage", "TPL+", -0.10),
      level("coverage", "TPL++", -0.15),
      level("fuel", "diesel", 0.18),
      level("sex", "female", 0.05),
      level("use", "work", 0.05),
      level("fleet", "yes", -0.12),
  };

  c.severity.intercept = std::log(1300.0);
  c.severity.terms = {
      scaled(Kind::Linear, "ageph", -0.05, 45, 20),
      scaled(Kind::Linear, "power", 0.10, 70, 40),
      level("coverage", "TPL++", 0.10),
      level("fuel", "diesel", -0.05),
  };
  c.severity_shape = 2.0;
  return c;
}

json SimulationConfig::to_json() const {
  json feats = json::array();
  for (const auto& g : features) {
    if (g.kind == FeatureKind::Categorical) {
      feats.push_back({{"name", g.name},
                       {"kind", "categorical"},
                       {"levels", g.levels},
                       {"probabilities", g.probabilities}});
    } else {
      json j{{"name", g.name},
             {"kind", "continuous"},
             {"distribution",
              g.distribution == FeatureGenerator::Distribution::Normal ? "normal" : "uniform"},
             {"lo", g.lo},
             {"hi", g.hi},
             {"integer", g.integer}};
      if (g.step > 0.0) j["step"] = g.step;
      if (g.distribution == FeatureGenerator::Distribution::Normal) {
        j["mean"] = g.mean;
        j["sd"] = g.sd;
      }
      feats.push_back(std::move(j));
    }
  }
  return {{"n", n},
          {"features", std::move(feats)},
          {"full_year_share", full_year_share},
          {"min_exposure", min_exposure},
          {"frequency", surface_to_json(frequency)},
          {"severity", surface_to_json(severity)},
          {"severity_shape", severity_shape}};
}

SimulationConfig SimulationConfig::from_json(const json& j) {
  try {
    SimulationConfig c;
    const auto n = j.at("n").get<long long>();
    if (n <= 0) throw UsageError("simulation: n must be positive");
    c.n = static_cast<std::size_t>(n);
    for (const auto& f : j.at("features")) {
      FeatureGenerator g;
      g.name = f.at("name").get<std::string>();
      const auto kind = f.at("kind").get<std::string>();
      if (kind == "categorical") {
        g.kind = FeatureKind::Categorical;
        g.levels = f.at("levels").get<std::vector<std::string>>();
        g.probabilities = f.at("probabilities").get<std::vector<double>>();
      } else if (kind == "continuous") {
        const auto dist = f.value("distribution", std::string("uniform"));
        if (dist == "normal") {
          g.distribution = FeatureGenerator::Distribution::Normal;
        } else if (dist != "uniform") {
          throw UsageError("simulation: unknown distribution '" + dist + "'");
        }
        g.lo = f.at("lo").get<double>();
        g.hi = f.at("hi").get<double>();
        g.mean = f.value("mean", 0.5 * (g.lo + g.hi));
        g.sd = f.value("sd", 1.0);
        g.integer = f.value("integer", false);
        g.step = f.value("step", 0.0);
      } else {
        throw UsageError("simulation: unknown feature kind '" + kind + "'");
      }
      c.features.push_back(std::move(g));
    }
    c.full_year_share = j.value("full_year_share", c.full_year_share);
    c.min_exposure = j.value("min_exposure", c.min_exposure);
    c.frequency = surface_from_json(j.at("frequency"));
    c.severity = surface_from_json(j.at("severity"));
    c.severity_shape = j.value("severity_shape", c.severity_shape);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw UsageError(std::string("simulation config: ") + e.what());
  }
}

SimulatedPortfolio simulate_portfolio(const SimulationConfig& config, std::uint64_t seed) {
  config.validate();
  const Schema schema = config.schema();
  const BoundSurface freq(config.frequency, schema);
  const BoundSurface sev(config.severity, schema);

  std::vector<std::discrete_distribution<std::uint32_t>> level_draws;
  for (const auto& g : config.features) {
    level_draws.emplace_back(g.probabilities.begin(), g.probabilities.end());
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SimulatedPortfolio out;
  out.eta_frequency.reserve(config.n);
  out.eta_severity.reserve(config.n);
  std::vector<PolicyRecord> records;
  records.reserve(config.n);

  for (std::size_t i = 0; i < config.n; ++i) {
    PolicyRecord r;
    r.id = std::to_string(i + 1);
    r.features.resize(config.features.size());
    for (std::size_t j = 0; j < config.features.size(); ++j) {
      const auto& g = config.features[j];
      double v;
      if (g.kind == FeatureKind::Categorical) {
        v = static_cast<double>(level_draws[j](rng));
      } else {
        if (g.distribution == FeatureGenerator::Distribution::Normal) {
          v = std::normal_distribution<double>(g.mean, g.sd)(rng);
        } else {
          v = g.lo + (g.hi - g.lo) * unit(rng);
        }
        if (g.step > 0.0) v = g.lo + std::round((v - g.lo) / g.step) * g.step;
        if (g.integer) v = std::round(v);
        v = std::clamp(v, g.lo, g.hi);
      }
      r.features[j] = v;
    }
    r.expo = unit(rng) < config.full_year_share
                 ? 1.0
                 : config.min_exposure + (1.0 - config.min_exposure) * unit(rng);

    const double eta_f = freq(r.features);
    const double eta_s = sev(r.features);
    r.nclaims = std::poisson_distribution<std::int64_t>(r.expo * std::exp(eta_f))(rng);
    if (r.nclaims > 0) {
      std::gamma_distribution<double> claim(config.severity_shape,
                                            std::exp(eta_s) / config.severity_shape);
      for (std::int64_t c = 0; c < r.nclaims; ++c) r.amount += claim(rng);
    }
    out.eta_frequency.push_back(eta_f);
    out.eta_severity.push_back(eta_s);
    records.push_back(std::move(r));
  }
  out.portfolio = Portfolio(schema, std::move(records));
  return out;
}

}  // namespace freqsev
