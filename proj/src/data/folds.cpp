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
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "freqsev/csv.hpp"
#include "freqsev/data.hpp"
#include "freqsev/error.hpp"
#include "freqsev/rng.hpp"

namespace freqsev {
namespace {

void check_fold_count(std::size_t n, int k) {
  if (k < 2) throw std::invalid_argument("folds: need at least two folds");
  if (static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("folds: more folds (" + std::to_string(k) + ") than rows (" +
                                std::to_string(n) + ")");
  }
}

FoldAssignment deal(std::span<const std::size_t> order, int k) {
  FoldAssignment out;
  out.k = k;
  out.labels.assign(order.size(), 0);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    out.labels[order[rank]] = static_cast<int>(rank % static_cast<std::size_t>(k)) + 1;
  }
  return out;
}

}  // namespace

std::vector<std::size_t> FoldAssignment::rows_in(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldAssignment::rows_not_in(std::initializer_list<int> folds) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::find(folds.begin(), folds.end(), labels[i]) == folds.end()) rows.push_back(i);
  }
  return rows;
}

FoldAssignment FoldAssignment::restrict(std::span<const std::size_t> rows) const {
  FoldAssignment out;
  out.k = k;
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels.at(r));
  return out;
}

FoldAssignment stratified_folds(const Portfolio& portfolio, int k, std::uint64_t seed) {
  const std::size_t n = portfolio.size();
  check_fold_count(n, k);

  struct Key {
    double frequency;
    double severity;
  };
  std::vector<Key> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = portfolio[i];
    keys[i].frequency = static_cast<double>(r.nclaims) / r.expo;
    keys[i].severity = r.nclaims > 0 ? r.amount / static_cast<double>(r.nclaims) : 0.0;
  }

  // Shuffling first and sorting stably randomizes the order inside groups of
  // equal keys (mostly claim-free full-year policies).
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a].frequency != keys[b].frequency) return keys[a].frequency < keys[b].frequency;
    return keys[a].severity < keys[b].severity;
  });
  return deal(order, k);
}

FoldAssignment random_folds(std::size_t n, int k, std::uint64_t seed) {
  check_fold_count(n, k);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return deal(order, k);
}

void write_folds(std::ostream& out, const Portfolio& portfolio, const FoldAssignment& folds) {
  if (folds.size() != portfolio.size()) throw std::invalid_argument("folds: size mismatch");
  out << "id,fold\n";
  for (std::size_t i = 0; i < portfolio.size(); ++i) {
    out << csv::escape(portfolio[i].id) << ',' << folds.labels[i] << '\n';
  }
}

FoldAssignment read_folds(std::istream& in, const Portfolio& portfolio) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->size() < 2 || (*header)[0] != "id" || (*header)[1] != "fold") {
    throw DataError("folds: expected header id,fold");
  }
  std::unordered_map<std::string, int> by_id;
  int k = 0;
  while (auto fields = reader.next()) {
    if (fields->size() < 2) throw DataError("folds: line " + std::to_string(reader.line()));
    int fold = 0;
    try {
      fold = static_cast<int>(csv::parse_double((*fields)[1]));
    } catch (const std::invalid_argument& e) {
      throw DataError("folds: line " + std::to_string(reader.line()) + ": " + e.what());
    }
    if (fold < 1) throw DataError("folds: line " + std::to_string(reader.line()) + ": bad fold");
    k = std::max(k, fold);
    if (!by_id.emplace((*fields)[0], fold).second) {
      throw DataError("folds: duplicate id " + (*fields)[0]);
    }
  }
  FoldAssignment out;
  out.k = k;
  out.labels.reserve(portfolio.size());
  for (const auto& r : portfolio.records()) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) throw DataError("folds: no fold for policy " + r.id);
    out.labels.push_back(it->second);
  }
  return out;
}

}  // namespace freqsev
