#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "ser/detail/rng.hpp"
#include "ser/error.hpp"
#include "ser/models/common.hpp"

namespace ser {

// Internal nodes route `value <= threshold` to `left`. Leaves carry the class
// distribution of the training rows that reached them.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<double, kNumClasses> distribution{};

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Nodes are stored in pre-order; node 0 is the root.
struct TreeModel {
  std::vector<TreeNode> nodes;
  std::size_t num_features = 0;
  bool pruned = false;

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }
  bool operator==(const TreeModel&) const = default;
};

struct TreeConfig {
  double prune_fraction = 0.2;
  std::uint64_t seed = 0;
};

namespace detail {

inline double gini(const std::array<std::size_t, kNumClasses>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    g -= p * p;
  }
  return g;
}

class TreeBuilder {
 public:
  explicit TreeBuilder(const TrainingSet& data) : data_(data) {}

  // Grows the subtree over `rows` and returns its node id.
  int grow(std::vector<std::size_t> rows) {
    std::array<std::size_t, kNumClasses> counts{};
    for (auto r : rows) ++counts[class_index(data_.y[r])];

    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    auto& node = nodes_.back();
    for (std::size_t c = 0; c < kNumClasses; ++c)
      node.distribution[c] = static_cast<double>(counts[c]) / static_cast<double>(rows.size());

    const bool pure = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
    if (pure || rows.size() < 2) return id;

    const auto split = best_split(rows, counts);
    if (split.feature < 0) return id;  // all rows share one feature vector

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (data_.x[r][static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(r);
    }
    nodes_[static_cast<std::size_t>(id)].feature = split.feature;
    nodes_[static_cast<std::size_t>(id)].threshold = split.threshold;
    const int l = grow(std::move(left));
    nodes_[static_cast<std::size_t>(id)].left = l;
    const int r = grow(std::move(right));
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  std::vector<TreeNode> take() { return std::move(nodes_); }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = -1.0;
  };

  // Largest Gini decrease over midpoints between distinct consecutive values.
  // Zero-gain splits are admissible so that any impure node with distinct
  // rows can still be separated. Ties favour the lower feature, then the
  // lower threshold.
  Split best_split(const std::vector<std::size_t>& rows,
                   const std::array<std::size_t, kNumClasses>& counts) const {
    constexpr double kTie = 1e-12;
    const std::size_t n = rows.size();
    const double parent = gini(counts, n);
    Split best;
    std::vector<std::pair<double, std::size_t>> sorted(n);
    for (std::size_t f = 0; f < data_.dims(); ++f) {
      for (std::size_t i = 0; i < n; ++i)
        sorted[i] = {data_.x[rows[i]][f], class_index(data_.y[rows[i]])};
      std::sort(sorted.begin(), sorted.end());
      std::array<std::size_t, kNumClasses> left{};
      for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left[sorted[i].second];
        const double a = sorted[i].first;
        const double b = sorted[i + 1].first;
        if (!(a < b)) continue;
        std::array<std::size_t, kNumClasses> right{};
        for (std::size_t c = 0; c < kNumClasses; ++c) right[c] = counts[c] - left[c];
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        const double gain = parent - (static_cast<double>(nl) * gini(left, nl) + static_cast<double>(nr) * gini(right, nr)) /
                                         static_cast<double>(n);
        if (gain > best.gain + kTie) {
          double t = a + (b - a) / 2.0;
          if (!(t < b)) t = a;
          best = {static_cast<int>(f), t, gain};
        }
      }
    }
    return best;
  }

  const TrainingSet& data_;
  std::vector<TreeNode> nodes_;
};

inline std::size_t leaf_for(const std::vector<TreeNode>& nodes, std::span<const double> row) {
  std::size_t id = 0;
  while (!nodes[id].is_leaf()) {
    const auto& n = nodes[id];
    id = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return id;
}

inline EmotionClass majority(const TreeNode& n) {
  return ClassScores::from_scores(n.distribution).label;
}

inline std::size_t correct_on(const std::vector<TreeNode>& nodes, const TrainingSet& data,
                              const std::vector<std::size_t>& rows) {
  std::size_t ok = 0;
  for (auto r : rows) ok += majority(nodes[leaf_for(nodes, data.x[r])]) == data.y[r] ? 1 : 0;
  return ok;
}

// Bottom-up reduced-error pruning. Returns holdout rows classified correctly
// by the (possibly collapsed) subtree rooted at `id`.
inline std::size_t prune(std::vector<TreeNode>& nodes, std::size_t id, const TrainingSet& holdout,
                         const std::vector<std::size_t>& rows) {
  auto& node = nodes[id];
  const EmotionClass as_leaf = majority(node);
  std::size_t leaf_correct = 0;
  for (auto r : rows) leaf_correct += holdout.y[r] == as_leaf ? 1 : 0;
  if (node.is_leaf()) return leaf_correct;

  std::vector<std::size_t> left, right;
  for (auto r : rows)
    (holdout.x[r][static_cast<std::size_t>(node.feature)] <= node.threshold ? left : right).push_back(r);
  const auto l = static_cast<std::size_t>(node.left);
  const auto rt = static_cast<std::size_t>(node.right);
  const std::size_t subtree_correct = prune(nodes, l, holdout, left) + prune(nodes, rt, holdout, right);
  if (leaf_correct >= subtree_correct) {
    nodes[id].feature = -1;
    nodes[id].threshold = 0.0;
    nodes[id].left = nodes[id].right = -1;
    return leaf_correct;
  }
  return subtree_correct;
}

// Drops nodes no longer reachable from the root and renumbers in pre-order.
inline std::vector<TreeNode> compact(const std::vector<TreeNode>& nodes) {
  std::vector<TreeNode> out;
  auto visit = [&](auto&& self, std::size_t id) -> int {
    const int new_id = static_cast<int>(out.size());
    out.push_back(nodes[id]);
    if (!nodes[id].is_leaf()) {
      const int l = self(self, static_cast<std::size_t>(nodes[id].left));
      out[static_cast<std::size_t>(new_id)].left = l;
      const int r = self(self, static_cast<std::size_t>(nodes[id].right));
      out[static_cast<std::size_t>(new_id)].right = r;
    }
    return new_id;
  };
  visit(visit, 0);
  return out;
}

// Stratified, seeded carve-out of floor(fraction * n_c) rows per class for
// pruning. Both index lists come back sorted.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout_split(const TrainingSet& train,
                                                                                   double fraction,
                                                                                   std::uint64_t seed) {
  std::vector<std::size_t> grow_rows, holdout_rows;
  if (fraction > 0.0) {
    Rng rng(seed);
    for (auto c : kAllClasses) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < train.size(); ++i)
        if (train.y[i] == c) members.push_back(i);
      rng.shuffle(std::span<std::size_t>(members));
      const auto take = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(members.size())));
      holdout_rows.insert(holdout_rows.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
      grow_rows.insert(grow_rows.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
    }
    std::sort(grow_rows.begin(), grow_rows.end());
    std::sort(holdout_rows.begin(), holdout_rows.end());
  } else {
    grow_rows.resize(train.size());
    std::iota(grow_rows.begin(), grow_rows.end(), 0);
  }
  return {std::move(grow_rows), std::move(holdout_rows)};
}

}  // namespace detail

// CART growth on Gini impurity. With prune_fraction > 0 a stratified holdout
// is carved from `train` (seeded) and used for reduced-error pruning; the tree
// is grown on the remaining rows.
inline TreeModel train_tree(const TrainingSet& train, const TreeConfig& cfg = {}) {
  train.check();
  if (train.size() < 4) throw Error(ErrorCode::TooFewRows, "tree needs at least four rows");
  if (!(cfg.prune_fraction >= 0.0 && cfg.prune_fraction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "prune_fraction must lie in [0, 1)");

  const auto [grow_rows, holdout_rows] = detail::holdout_split(train, cfg.prune_fraction, cfg.seed);
  detail::TreeBuilder builder(train);
  builder.grow(grow_rows);
  TreeModel model;
  model.nodes = builder.take();
  model.num_features = train.dims();

  if (!holdout_rows.empty()) {
    [[maybe_unused]] const std::size_t before = detail::correct_on(model.nodes, train, holdout_rows);
    const std::size_t after = detail::prune(model.nodes, 0, train, holdout_rows);
    model.nodes = detail::compact(model.nodes);
    assert(after >= before && after == detail::correct_on(model.nodes, train, holdout_rows));
    (void)after;
    model.pruned = true;
  }
  return model;
}

inline ClassScores predict_tree(const TreeModel& model, std::span<const double> row) {
  check_row_width(row, model.num_features);
  return ClassScores::from_scores(model.nodes[detail::leaf_for(model.nodes, row)].distribution);
}

}  // namespace ser
