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

#include "freqsev/model.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "freqsev/error.hpp"

namespace freqsev {

using nlohmann::json;

std::string_view to_string(ModelClass kind) noexcept {
  switch (kind) {
    case ModelClass::Tree: return "tree";
    case ModelClass::Forest: return "forest";
    case ModelClass::Gbm: return "gbm";
  }
  return "unknown";
}

ModelClass parse_model_class(std::string_view name) {
  if (name == "tree") return ModelClass::Tree;
  if (name == "forest") return ModelClass::Forest;
  if (name == "gbm") return ModelClass::Gbm;
  throw UsageError("unknown model class: " + std::string(name));
}

LossKind Model::loss() const {
  return std::visit([](const auto& m) { return m.loss(); }, impl_);
}

const Schema& Model::schema() const {
  return std::visit([](const auto& m) -> const Schema& { return m.schema(); }, impl_);
}

double Model::predict(std::span<const double> x) const {
  return std::visit([&](const auto& m) { return m.predict(x); }, impl_);
}

double Model::predict_link(std::span<const double> x) const {
  if (const Gbm* g = gbm()) return g->link(x);
  const double mu = predict(x);
  return loss() == LossKind::SquaredError ? mu : std::log(mu);
}

std::vector<double> Model::predict(const FeatureMatrix& x) const {
  return std::visit([&](const auto& m) { return m.predict(x); }, impl_);
}

namespace {

std::vector<double> mean_importance(std::span<const Tree> trees, std::size_t features) {
  std::vector<double> out(features, 0.0);
  for (const auto& t : trees) {
    const auto imp = t.importance();
    for (std::size_t j = 0; j < features; ++j) out[j] += imp[j];
  }
  if (!trees.empty()) {
    for (auto& v : out) v /= static_cast<double>(trees.size());
  }
  return out;
}

}  // namespace

std::vector<double> Model::importance() const {
  if (const Tree* t = tree()) return t->importance();
  if (const Forest* f = forest()) return mean_importance(f->trees(), f->schema().size());
  const Gbm& g = *gbm();
  return mean_importance(g.stages(), g.schema().size());
}

json Model::to_json() const {
  json body = std::visit([](const auto& m) { return m.to_json(); }, impl_);
  return {{"format", "freqsev-model"},
          {"version", 1},
          {"class", to_string(model_class())},
          {"schema", schema().to_json()},
          {"model", std::move(body)}};
}

Model Model::from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "freqsev-model") throw DataError("model: not a model file");
    if (j.at("version").get<int>() != 1) throw DataError("model: unsupported version");
    const Schema schema = Schema::from_json(j.at("schema"));
    const json& body = j.at("model");
    switch (parse_model_class(j.at("class").get<std::string>())) {
      case ModelClass::Tree: return Model(Tree::from_json(body, schema));
      case ModelClass::Forest: return Model(Forest::from_json(body, schema));
      case ModelClass::Gbm: return Model(Gbm::from_json(body, schema));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
  throw DataError("model: unknown class");
}

void Model::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json().dump() << '\n';
  if (!out) throw DataError("cannot write " + path.string());
}

Model Model::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace freqsev
