#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbd/error.hpp"
#include "sbd/metrics.hpp"

namespace sbd {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Binary decision tree stored as a flat node array, nodes[0] is the root.
// Internal nodes route x[feature] < threshold to `left`, otherwise `right`.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  double gain = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaf value

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  double eval(std::span<const double> x) const {
    int i = 0;
    while (!nodes[std::size_t(i)].is_leaf()) {
      const TreeNode& n = nodes[std::size_t(i)];
      i = x[std::size_t(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[std::size_t(i)].weight;
  }
};

// Additive logistic-loss ensemble: p = logistic(base + lr * sum of trees).
struct GbdtModel {
  std::string class_tag;  // "cut" or "gradual"
  double learning_rate = 0.1;
  double base_score = 0.0;
  std::vector<std::string> schema_names;
  std::uint64_t schema_hash = 0;
  std::vector<Tree> trees;

  double raw_score(std::span<const double> x) const {
    double s = base_score;
    for (const Tree& t : trees) s += learning_rate * t.eval(x);
    return s;
  }

  double predict(std::span<const double> x) const { return logistic(raw_score(x)); }
};

inline void check_schema(const GbdtModel& model, const FeatureSchema& schema) {
  if (model.schema_hash != schema.hash()) {
    raise(Errc::SchemaMismatch, "model was trained on a different feature schema");
  }
}

inline double gbdt_predict(const GbdtModel& model, const FeatureVector& x,
                           const FeatureSchema& schema) {
  check_schema(model, schema);
  return model.predict(x.values);
}

// ---------------------------------------------------------------------------
// JSON model file
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json node_to_json(const std::vector<TreeNode>& nodes, int i) {
  const TreeNode& n = nodes[std::size_t(i)];
  if (n.is_leaf()) return nlohmann::json{{"weight", n.weight}};
  return nlohmann::json{{"feature", n.feature},
                        {"threshold", n.threshold},
                        {"gain", n.gain},
                        {"left", node_to_json(nodes, n.left)},
                        {"right", node_to_json(nodes, n.right)}};
}

inline int node_from_json(const nlohmann::json& j, std::vector<TreeNode>& nodes) {
  const int index = int(nodes.size());
  nodes.emplace_back();
  if (j.contains("feature")) {
    nodes[std::size_t(index)].feature = j.at("feature").get<int>();
    nodes[std::size_t(index)].threshold = j.at("threshold").get<double>();
    nodes[std::size_t(index)].gain = j.value("gain", 0.0);
    const int left = node_from_json(j.at("left"), nodes);
    const int right = node_from_json(j.at("right"), nodes);
    nodes[std::size_t(index)].left = left;
    nodes[std::size_t(index)].right = right;
  } else {
    nodes[std::size_t(index)].weight = j.at("weight").get<double>();
  }
  return index;
}

}  // namespace detail

inline nlohmann::json model_to_json(const GbdtModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : model.trees) trees.push_back(detail::node_to_json(t.nodes, 0));
  return nlohmann::json{{"version", 1},
                        {"class_tag", model.class_tag},
                        {"learning_rate", model.learning_rate},
                        {"base_score", model.base_score},
                        {"schema", model.schema_names},
                        {"schema_hash", model.schema_hash},
                        {"trees", std::move(trees)}};
}

inline GbdtModel model_from_json(const nlohmann::json& j) {
  try {
    GbdtModel m;
    m.class_tag = j.at("class_tag").get<std::string>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.base_score = j.at("base_score").get<double>();
    m.schema_names = j.at("schema").get<std::vector<std::string>>();
    m.schema_hash = j.at("schema_hash").get<std::uint64_t>();
    for (const auto& tj : j.at("trees")) {
      Tree t;
      detail::node_from_json(tj, t.nodes);
      for (const TreeNode& n : t.nodes) {
        if (!n.is_leaf() && std::size_t(n.feature) >= m.schema_names.size()) {
          raise(Errc::ParseError, "split feature index out of schema range");
        }
      }
      m.trees.push_back(std::move(t));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::ParseError, std::string("bad model file: ") + e.what());
  }
}

inline void save_model(const std::string& path, const GbdtModel& model) {
  std::ofstream out(path);
  if (!out) raise(Errc::IoError, "cannot write " + path);
  out << model_to_json(model).dump(2) << '\n';
}

inline GbdtModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::IoError, "cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::ParseError, std::string("bad model file: ") + e.what());
  }
  return model_from_json(j);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainParams {
  int n_trees = 100;
  int max_depth = 4;
  double learning_rate = 0.1;
  int min_samples_leaf = 5;
  double l2_lambda = 1.0;
  double negative_subsample_ratio = 5.0;  // negatives kept per positive
  std::uint64_t seed = 1;
};

struct SplitChoice {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Exact greedy scan: thresholds at midpoints of sorted distinct values,
// gain = 1/2 [GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)], both children at
// least min_samples_leaf. Ties break toward the lowest feature index,
// then the lowest threshold.
inline SplitChoice find_best_split(const std::vector<std::vector<double>>& x,
                                   std::span<const double> grad, std::span<const double> hess,
                                   std::span<const int> indices, int n_features,
                                   const TrainParams& params) {
  SplitChoice best;
  const int n = int(indices.size());
  if (n < 2 * params.min_samples_leaf) return best;
  double total_g = 0.0, total_h = 0.0;
  for (int i : indices) {
    total_g += grad[std::size_t(i)];
    total_h += hess[std::size_t(i)];
  }
  const double lambda = params.l2_lambda;
  const double parent_term = total_g * total_g / (total_h + lambda);
  std::vector<std::pair<double, int>> order(std::size_t(n), {0.0, 0});
  for (int f = 0; f < n_features; ++f) {
    for (int i = 0; i < n; ++i) {
      order[std::size_t(i)] = {x[std::size_t(indices[std::size_t(i)])][std::size_t(f)],
                               indices[std::size_t(i)]};
    }
    std::sort(order.begin(), order.end());
    double gl = 0.0, hl = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
      gl += grad[std::size_t(order[std::size_t(i)].second)];
      hl += hess[std::size_t(order[std::size_t(i)].second)];
      if (order[std::size_t(i)].first == order[std::size_t(i + 1)].first) continue;
      const int left_count = i + 1;
      const int right_count = n - left_count;
      if (left_count < params.min_samples_leaf || right_count < params.min_samples_leaf) continue;
      const double gr = total_g - gl;
      const double hr = total_h - hl;
      const double gain =
          0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent_term);
      if (gain > best.gain) {
        best.valid = true;
        best.feature = f;
        best.threshold = (order[std::size_t(i)].first + order[std::size_t(i + 1)].first) / 2.0;
        best.gain = gain;
      }
    }
  }
  return best;
}

namespace detail {

inline int grow_node(Tree& tree, const std::vector<std::vector<double>>& x,
                     std::span<const double> grad, std::span<const double> hess,
                     std::vector<int>& indices, int depth, const TrainParams& params) {
  const int node_index = int(tree.nodes.size());
  tree.nodes.emplace_back();
  double g = 0.0, h = 0.0;
  for (int i : indices) {
    g += grad[std::size_t(i)];
    h += hess[std::size_t(i)];
  }
  SplitChoice split;
  if (depth < params.max_depth) {
    split = find_best_split(x, grad, hess, indices, int(x.empty() ? 0 : x[0].size()), params);
  }
  if (!split.valid || split.gain <= 0.0) {
    tree.nodes[std::size_t(node_index)].weight = -g / (h + params.l2_lambda);
    return node_index;
  }
  std::vector<int> left, right;
  left.reserve(indices.size());
  right.reserve(indices.size());
  for (int i : indices) {
    if (x[std::size_t(i)][std::size_t(split.feature)] < split.threshold) {
      left.push_back(i);
    } else {
      right.push_back(i);
    }
  }
  indices.clear();
  indices.shrink_to_fit();
  const int left_index = grow_node(tree, x, grad, hess, left, depth + 1, params);
  const int right_index = grow_node(tree, x, grad, hess, right, depth + 1, params);
  TreeNode& node = tree.nodes[std::size_t(node_index)];
  node.feature = split.feature;
  node.threshold = split.threshold;
  node.gain = split.gain;
  node.left = left_index;
  node.right = right_index;
  return node_index;
}

}  // namespace detail

struct TrainTrace {
  std::vector<double> round_logloss;  // training log-loss after each round
};

// Binary logistic boosting over a dense sample matrix. Deterministic for a
// fixed sample order and parameter set. y holds 0/1 labels.
inline GbdtModel train_gbdt_binary(const std::vector<std::vector<double>>& x,
                                   const std::vector<int>& y, const FeatureSchema& schema,
                                   const std::string& class_tag, const TrainParams& params,
                                   TrainTrace* trace = nullptr) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n) raise(Errc::DegenerateData, "empty or mismatched training data");
  std::size_t n_pos = 0;
  for (int label : y) n_pos += std::size_t(label != 0);
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    raise(Errc::DegenerateData, "training data holds a single class");
  }

  GbdtModel model;
  model.class_tag = class_tag;
  model.learning_rate = params.learning_rate;
  model.base_score = std::log(double(n_pos) / double(n_neg));
  model.schema_names = schema.names();
  model.schema_hash = schema.hash();

  std::vector<double> score(n, model.base_score);
  std::vector<double> grad(n), hess(n);
  for (int round = 0; round < params.n_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = logistic(score[i]);
      grad[i] = p - double(y[i]);
      hess[i] = p * (1.0 - p);
    }
    Tree tree;
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    detail::grow_node(tree, x, grad, hess, all, 0, params);
    // no valid split at the root: the intercept already sits at the base
    // rate, so boosting is done (at round 0 this leaves base_score only)
    if (tree.nodes[0].is_leaf()) break;
    for (std::size_t i = 0; i < n; ++i) {
      score[i] += params.learning_rate * tree.eval(x[i]);
    }
    model.trees.push_back(std::move(tree));
    if (trace) {
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double p = logistic(score[i]);
        const double eps = 1e-15;
        loss -= y[i] ? std::log(std::max(p, eps)) : std::log(std::max(1.0 - p, eps));
      }
      trace->round_logloss.push_back(loss / double(n));
    }
  }
  return model;
}

// Total split gain accumulated per schema feature, sorted descending.
inline std::vector<std::pair<std::string, double>> feature_importance(const GbdtModel& model) {
  std::vector<double> gains(model.schema_names.size(), 0.0);
  for (const Tree& t : model.trees) {
    for (const TreeNode& n : t.nodes) {
      if (!n.is_leaf()) gains[std::size_t(n.feature)] += n.gain;
    }
  }
  std::vector<std::pair<std::string, double>> out;
  out.reserve(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) out.emplace_back(model.schema_names[i], gains[i]);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

}  // namespace sbd
