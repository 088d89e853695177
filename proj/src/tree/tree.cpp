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
#include <sstream>
#include <string>

#include "freqsev/csv.hpp"
#include "freqsev/error.hpp"
#include "freqsev/tree.hpp"

namespace freqsev {
namespace {

using nlohmann::json;

std::string levels_json(const FeatureSpec& f, std::span<const std::uint32_t> codes) {
  json arr = json::array();
  for (std::uint32_t c : codes) arr.push_back(f.levels[c]);
  return arr.dump();
}

std::uint64_t rpart_id_limit() { return std::uint64_t{1} << 62; }

}  // namespace

Tree::Tree(LossKind loss, Schema schema, std::vector<TreeNode> nodes)
    : loss_(loss), schema_(std::move(schema)), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DataError("tree: no nodes");
  std::vector<int> parents(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    TreeNode& n = nodes_[i];
    if (n.leaf()) {
      if (n.right != TreeNode::kNone) throw DataError("tree: node with one child");
      n.feature = TreeNode::kNone;
      n.left_levels.clear();
      continue;
    }
    const auto size = static_cast<std::int32_t>(nodes_.size());
    if (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size || n.left == n.right) {
      throw DataError("tree: child index out of range at node " + std::to_string(i));
    }
    ++parents[n.left];
    ++parents[n.right];
    if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= schema_.size()) {
      throw DataError("tree: split feature out of range at node " + std::to_string(i));
    }
    const FeatureSpec& f = schema_[n.feature];
    if (f.categorical()) {
      std::sort(n.left_levels.begin(), n.left_levels.end());
      if (n.left_levels.empty() ||
          std::adjacent_find(n.left_levels.begin(), n.left_levels.end()) != n.left_levels.end() ||
          n.left_levels.back() >= f.levels.size()) {
        throw DataError("tree: bad level set at node " + std::to_string(i));
      }
    } else if (!std::isfinite(n.threshold)) {
      throw DataError("tree: non-finite threshold at node " + std::to_string(i));
    }
  }
  if (parents[0] != 0) throw DataError("tree: root has a parent");
  for (std::size_t i = 1; i < parents.size(); ++i) {
    if (parents[i] != 1) throw DataError("tree: node " + std::to_string(i) + " is not reachable once");
  }
  // Every node has one parent and the root none, so with n - 1 edges a cycle
  // would leave some node unreachable; check reachability explicitly.
  std::vector<std::int32_t> stack{0};
  std::size_t seen = 0;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    if (++seen > nodes_.size()) break;
    if (!nodes_[i].leaf()) {
      stack.push_back(nodes_[i].right);
      stack.push_back(nodes_[i].left);
    }
  }
  if (seen != nodes_.size()) throw DataError("tree: nodes do not form a tree");
}

std::size_t Tree::child(std::size_t i, std::span<const double> x) const {
  const TreeNode& n = nodes_[i];
  const double v = x[n.feature];
  bool left;
  if (!n.left_levels.empty()) {
    const FeatureSpec& f = schema_[n.feature];
    if (!(v >= 0.0) || v != std::floor(v) || v >= static_cast<double>(f.levels.size())) {
      throw DataError("unseen level for categorical feature " + f.name);
    }
    left = std::binary_search(n.left_levels.begin(), n.left_levels.end(),
                              static_cast<std::uint32_t>(v));
  } else {
    left = v <= n.threshold;
  }
  return static_cast<std::size_t>(left ? n.left : n.right);
}

std::size_t Tree::leaf_of(std::span<const double> x) const {
  if (x.size() != schema_.size()) throw DataError("tree: feature vector has the wrong length");
  std::size_t i = 0;
  while (!nodes_[i].leaf()) i = child(i, x);
  return i;
}

void Tree::path_of(std::span<const double> x, std::vector<std::size_t>& path) const {
  if (x.size() != schema_.size()) throw DataError("tree: feature vector has the wrong length");
  path.clear();
  std::size_t i = 0;
  path.push_back(i);
  while (!nodes_[i].leaf()) {
    i = child(i, x);
    path.push_back(i);
  }
}

std::vector<double> Tree::predict(const FeatureMatrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
  return out;
}

std::size_t Tree::leaf_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.leaf(); }));
}

int Tree::depth() const noexcept {
  int best = 0;
  std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes_[i].leaf()) {
      stack.push_back({nodes_[i].left, d + 1});
      stack.push_back({nodes_[i].right, d + 1});
    }
  }
  return best;
}

std::vector<double> Tree::importance() const {
  std::vector<double> out(schema_.size(), 0.0);
  for (const auto& n : nodes_) {
    if (!n.leaf()) out[n.feature] += n.improvement;
  }
  return out;
}

void Tree::set_leaf_values(std::span<const double> values_by_node) {
  if (values_by_node.size() != nodes_.size()) throw std::invalid_argument("tree: one value per node");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].leaf()) nodes_[i].prediction = values_by_node[i];
  }
}

std::string Tree::to_text() const {
  using csv::format_double;
  std::ostringstream out;
  const bool rpart_ids = depth() < 62;
  out << "tree loss=" << to_string(loss_) << " nodes=" << nodes_.size()
      << " leaves=" << leaf_count() << "\n";
  out << "node) split n weight deviance yval improvement, * terminal\n";
  struct Item {
    std::int32_t node;
    int depth;
    std::uint64_t id;
    std::string condition;
  };
  std::vector<Item> stack{{0, 0, 1, "root"}};
  std::uint64_t sequence = 0;
  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    const TreeNode& n = nodes_[it.node];
    ++sequence;
    out << std::string(2 * static_cast<std::size_t>(it.depth), ' ')
        << (rpart_ids ? it.id : sequence) << ") " << it.condition << " n=" << n.count
        << " weight=" << format_double(n.weight) << " deviance=" << format_double(n.deviance)
        << " yval=" << format_double(n.prediction);
    if (n.leaf()) {
      out << " *\n";
      continue;
    }
    out << " improvement=" << format_double(n.improvement) << "\n";
    const FeatureSpec& f = schema_[n.feature];
    std::string lc, rc;
    if (f.categorical()) {
      const std::string set = levels_json(f, n.left_levels);
      lc = f.name + " in " + set;
      rc = f.name + " not in " + set;
    } else {
      lc = f.name + " <= " + format_double(n.threshold);
      rc = f.name + " > " + format_double(n.threshold);
    }
    const std::uint64_t child = it.id < rpart_id_limit() ? 2 * it.id : 0;
    stack.push_back({n.right, it.depth + 1, child + 1, std::move(rc)});
    stack.push_back({n.left, it.depth + 1, child, std::move(lc)});
  }
  return out.str();
}

Tree Tree::from_text(std::string_view text, const Schema& schema) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw DataError("tree text line " + std::to_string(line_no) + ": " + what);
  };

  std::getline(in, line);
  ++line_no;
  const std::string head = "tree loss=";
  if (line.rfind(head, 0) != 0) fail("expected header");
  const auto end = line.find(' ', head.size());
  LossKind loss;
  try {
    loss = parse_loss_kind(line.substr(head.size(), end - head.size()));
  } catch (const UsageError& e) {
    fail(e.what());
  }
  std::getline(in, line);
  ++line_no;

  std::vector<TreeNode> nodes;
  std::vector<std::int32_t> path;  // node index at each depth on the current branch
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(' ') == std::string::npos) continue;
    const std::size_t indent = line.find_first_not_of(' ');
    if (indent % 2 != 0) fail("odd indentation");
    const std::size_t depth = indent / 2;

    // Trailing fields have no spaces in them; peel them off the right.
    std::vector<std::string> tail;
    std::string rest = line.substr(indent);
    bool leaf = false;
    auto pop_field = [&] {
      const auto sp = rest.rfind(' ');
      if (sp == std::string::npos) fail("truncated node line");
      std::string field = rest.substr(sp + 1);
      rest.resize(sp);
      return field;
    };
    std::string field = pop_field();
    TreeNode node;
    if (field == "*") {
      leaf = true;
    } else {
      if (field.rfind("improvement=", 0) != 0) fail("missing improvement");
      node.improvement = csv::parse_double(field.substr(12));
    }
    auto expect = [&](const char* key) {
      const std::string f = pop_field();
      const std::size_t k = std::char_traits<char>::length(key);
      if (f.compare(0, k, key) != 0) fail(std::string("missing ") + key);
      return f.substr(k);
    };
    try {
      node.prediction = csv::parse_double(expect("yval="));
      node.deviance = csv::parse_double(expect("deviance="));
      node.weight = csv::parse_double(expect("weight="));
      node.count = std::stoull(expect("n="));
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    const auto paren = rest.find(") ");
    if (paren == std::string::npos) fail("missing node id");
    const std::string condition = rest.substr(paren + 2);
    if (!leaf) node.left = node.right = 0;  // marked internal until children arrive

    const auto index = static_cast<std::int32_t>(nodes.size());
    if (depth == 0) {
      if (!nodes.empty()) fail("second root");
      if (condition != "root") fail("expected root");
    } else {
      if (depth > path.size()) fail("indentation skips a level");
      path.resize(depth);
      TreeNode& parent = nodes[path.back()];
      if (parent.left == TreeNode::kNone) fail("child of a leaf");
      const bool is_left = parent.left == 0;
      // Condition: "<feature> <= c", "<feature> > c", "<feature> in [...]",
      // "<feature> not in [...]".
      std::optional<std::size_t> feature;
      std::string op_rest;
      for (std::size_t j = 0; j < schema.size(); ++j) {
        const std::string& name = schema[j].name;
        if (condition.size() > name.size() && condition.compare(0, name.size(), name) == 0 &&
            condition[name.size()] == ' ' && (!feature || schema[*feature].name.size() < name.size())) {
          feature = j;
          op_rest = condition.substr(name.size() + 1);
        }
      }
      if (!feature) fail("unknown feature in '" + condition + "'");
      const FeatureSpec& f = schema[*feature];
      if (is_left) {
        parent.feature = static_cast<std::int32_t>(*feature);
        if (f.categorical()) {
          if (op_rest.rfind("in ", 0) != 0) fail("expected 'in' for the left branch");
          json set;
          try {
            set = json::parse(op_rest.substr(3));
          } catch (const json::exception&) {
            fail("bad level list");
          }
          if (!set.is_array()) fail("bad level list");
          for (const auto& level : set) {
            if (!level.is_string()) fail("bad level list");
            const auto code = f.level_index(level.get<std::string>());
            if (!code) fail("unknown level " + level.dump());
            parent.left_levels.push_back(*code);
          }
        } else {
          if (op_rest.rfind("<= ", 0) != 0) fail("expected '<=' for the left branch");
          try {
            parent.threshold = csv::parse_double(op_rest.substr(3));
          } catch (const std::invalid_argument& e) {
            fail(e.what());
          }
        }
        parent.left = index;
      } else {
        if (parent.right != 0) fail("more than two children");
        if (parent.feature != static_cast<std::int32_t>(*feature)) fail("sibling splits disagree");
        const bool ok = f.categorical() ? op_rest.rfind("not in ", 0) == 0 : op_rest.rfind("> ", 0) == 0;
        if (!ok) fail("unexpected right branch condition");
        parent.right = index;
      }
    }
    nodes.push_back(std::move(node));
    path.push_back(index);
  }
  for (const auto& n : nodes) {
    if (!n.leaf() && (n.left <= 0 || n.right <= 0)) {
      throw DataError("tree text: split without two children");
    }
  }
  return Tree(loss, schema, std::move(nodes));
}

json Tree::to_json() const {
  json nodes = json::array();
  for (const auto& n : nodes_) {
    json j{{"prediction", n.prediction},
           {"weight", n.weight},
           {"count", n.count},
           {"deviance", n.deviance}};
    if (!n.leaf()) {
      const FeatureSpec& f = schema_[n.feature];
      j["left"] = n.left;
      j["right"] = n.right;
      j["feature"] = f.name;
      j["improvement"] = n.improvement;
      if (f.categorical()) {
        json levels = json::array();
        for (auto c : n.left_levels) levels.push_back(f.levels[c]);
        j["left_levels"] = std::move(levels);
      } else {
        j["threshold"] = n.threshold;
      }
    }
    nodes.push_back(std::move(j));
  }
  return {{"loss", to_string(loss_)}, {"nodes", std::move(nodes)}};
}

Tree Tree::from_json(const json& j, const Schema& schema) {
  try {
    const LossKind loss = parse_loss_kind(j.at("loss").get<std::string>());
    std::vector<TreeNode> nodes;
    for (const auto& e : j.at("nodes")) {
      TreeNode n;
      n.prediction = e.at("prediction").get<double>();
      n.weight = e.value("weight", 0.0);
      n.count = e.value("count", std::size_t{0});
      n.deviance = e.value("deviance", 0.0);
      if (e.contains("left")) {
        n.left = e.at("left").get<std::int32_t>();
        n.right = e.at("right").get<std::int32_t>();
        n.improvement = e.value("improvement", 0.0);
        const std::size_t f = schema.index_of(e.at("feature").get<std::string>());
        n.feature = static_cast<std::int32_t>(f);
        if (schema[f].categorical()) {
          for (const auto& level : e.at("left_levels")) {
            const auto code = schema[f].level_index(level.get<std::string>());
            if (!code) throw DataError("tree json: unknown level " + level.dump());
            n.left_levels.push_back(*code);
          }
        } else {
          n.threshold = e.at("threshold").get<double>();
        }
      }
      nodes.push_back(std::move(n));
    }
    return Tree(loss, schema, std::move(nodes));
  } catch (const json::exception& e) {
    throw DataError(std::string("tree json: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("tree json: ") + e.what());
  }
}

}  // namespace freqsev
