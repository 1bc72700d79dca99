#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ser/dataset.hpp"
#include "ser/detail/rng.hpp"
#include "ser/emotion.hpp"
#include "ser/error.hpp"

namespace ser {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per class, floor(train_fraction * n_i) rows (clamped to leave at least one
// on each side) go to training, chosen by a seeded shuffle. Both index lists
// come back in ascending order.
inline SplitIndices stratified_split(std::span<const EmotionClass> labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "train fraction must lie strictly between 0 and 1");
  SplitIndices out;
  detail::Rng rng(seed);
  for (auto c : kAllClasses) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) members.push_back(i);
    if (members.empty()) continue;
    if (members.size() < 2)
      throw Error(ErrorCode::TooFewRows, "class " + std::string(class_name(c)) + " has a single row");
    rng.shuffle(std::span<std::size_t>(members));
    auto take = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(members.size())));
    take = std::clamp<std::size_t>(take, 1, members.size() - 1);
    out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

inline LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> rows) {
  LabeledDataset out;
  out.rows.reserve(rows.size());
  for (auto r : rows) out.rows.push_back(data.rows[r]);
  return out;
}

inline std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& data, double train_fraction,
                                                                  std::uint64_t seed) {
  std::vector<EmotionClass> labels;
  labels.reserve(data.size());
  for (const auto& r : data.rows) {
    if (!r.label) throw Error(ErrorCode::InvalidDataset, "cannot split unlabelled rows");
    labels.push_back(*r.label);
  }
  const auto idx = stratified_split(labels, train_fraction, seed);
  return {subset(data, idx.train), subset(data, idx.test)};
}

}  // namespace ser
