#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "ser/emotion.hpp"
#include "ser/error.hpp"
#include "ser/functionals.hpp"

namespace ser {

using ClassCounts = std::array<std::size_t, kNumClasses>;

// Labelled feature vectors of one dimensionality.
struct LabeledDataset {
  std::vector<FeatureVector> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  std::size_t dimension() const { return rows.empty() ? 0 : rows.front().values.size(); }

  ClassCounts class_counts() const {
    ClassCounts counts{};
    for (const auto& r : rows)
      if (r.label) ++counts[class_index(*r.label)];
    return counts;
  }

  std::size_t classes_present() const {
    std::size_t n = 0;
    for (auto c : class_counts()) n += c > 0 ? 1 : 0;
    return n;
  }

  std::vector<double> column(std::size_t feature) const {
    std::vector<double> col(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i].values[feature];
    return col;
  }

  std::vector<int> labels() const {
    std::vector<int> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = static_cast<int>(class_index(*rows[i].label));
    return out;
  }

  // Every row labelled and of equal width, at least two classes, each with >= 2 rows.
  void validate() const {
    if (rows.empty()) throw Error(ErrorCode::InvalidDataset, "dataset is empty");
    const std::size_t dim = dimension();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].label) throw Error(ErrorCode::InvalidDataset, "row " + std::to_string(i) + " is unlabelled");
      if (rows[i].values.size() != dim)
        throw Error(ErrorCode::InvalidDataset, "row " + std::to_string(i) + " has a different width");
    }
    if (classes_present() < 2) throw Error(ErrorCode::InvalidDataset, "need at least two classes");
    for (auto n : class_counts())
      if (n == 1) throw Error(ErrorCode::InvalidDataset, "every present class needs at least two rows");
  }
};

}  // namespace ser
