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

#pragma once

// Synthetic motor portfolios with known frequency and severity surfaces.
// Claim counts are Poisson(e * exp(eta_freq(x))); each claim is gamma with
// mean exp(eta_sev(x)) and a fixed shape.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "freqsev/data.hpp"
#include "json.hpp"

namespace freqsev {

struct FeatureGenerator {
  enum class Distribution { Uniform, Normal };

  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  // Continuous: uniform on [lo, hi], or normal(mean, sd) clipped to [lo, hi];
  // `integer` rounds the draw, `step` > 0 snaps it to lo + k * step.
  Distribution distribution = Distribution::Uniform;
  double lo = 0.0;
  double hi = 1.0;
  double mean = 0.0;
  double sd = 1.0;
  bool integer = false;
  double step = 0.0;
  // Categorical.
  std::vector<std::string> levels;
  std::vector<double> probabilities;
};

// One additive contribution to a log-linear surface. With u = (x - center) /
// scale and v = (x2 - center2) / scale2:
//   linear: coef*u   quadratic: coef*u^2   step: coef*[x > threshold]
//   level: coef*[x == level]   product: coef*u*v
struct SurfaceTerm {
  enum class Kind { Linear, Quadratic, Step, Level, Product };

  Kind kind = Kind::Linear;
  std::string feature;
  std::string feature2;
  std::string level;
  double coef = 0.0;
  double center = 0.0;
  double scale = 1.0;
  double center2 = 0.0;
  double scale2 = 1.0;
  double threshold = 0.0;
};

struct Surface {
  double intercept = 0.0;
  std::vector<SurfaceTerm> terms;
};

// A surface with feature names resolved against a schema.
class BoundSurface {
 public:
  BoundSurface(const Surface& surface, const Schema& schema);
  double operator()(std::span<const double> x) const;

 private:
  struct Term {
    SurfaceTerm::Kind kind;
    std::size_t feature;
    std::size_t feature2;
    double level;
    double coef, center, scale, center2, scale2, threshold;
  };
  double intercept_;
  std::vector<Term> terms_;
};

struct SimulationConfig {
  std::size_t n = 0;
  std::vector<FeatureGenerator> features;
  // Share of policies exposed the full year; the rest get uniform(min, 1).
  double full_year_share = 0.8;
  double min_exposure = 0.05;
  Surface frequency;
  Surface severity;
  double severity_shape = 2.0;

  // Throws UsageError describing the first problem found.
  void validate() const;
  Schema schema() const;

  // MTPL-like rating factors with non-linear age and bonus-malus effects
  // and a long x lat interaction in frequency.
  static SimulationConfig mtpl(std::size_t n);

  nlohmann::json to_json() const;
  static SimulationConfig from_json(const nlohmann::json& j);
};

struct SimulatedPortfolio {
  Portfolio portfolio;
  std::vector<double> eta_frequency;
  std::vector<double> eta_severity;
};

SimulatedPortfolio simulate_portfolio(const SimulationConfig& config, std::uint64_t seed);

}  // namespace freqsev
