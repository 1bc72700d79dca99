#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "ser/error.hpp"
#include "ser/models/common.hpp"

namespace ser {

struct KnnModel {
  TrainingSet train;
  std::size_t k = 10;
  double epsilon = 1e-9;

  std::size_t dims() const { return train.dims(); }
  bool operator==(const KnnModel& o) const {
    return train.x == o.train.x && train.y == o.train.y && k == o.k && epsilon == o.epsilon;
  }
};

inline KnnModel train_knn(TrainingSet train, std::size_t k = 10) {
  train.check();
  if (k < 1 || k > train.size())
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " with " + std::to_string(train.size()) + " rows");
  KnnModel m;
  m.train = std::move(train);
  m.k = k;
  return m;
}

// Inverse-distance weighted class membership over the k nearest rows. Rows at
// equal distance keep training order, which settles the k-th neighbour.
inline ClassScores predict_knn(const KnnModel& model, std::span<const double> row) {
  check_row_width(row, model.dims());
  const std::size_t n = model.train.size();
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = std::sqrt(squared_distance(model.train.x[i], row));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

  std::array<double, kNumClasses> weight{};
  double total = 0.0;
  for (std::size_t r = 0; r < model.k; ++r) {
    const std::size_t i = order[r];
    const double w = 1.0 / (dist[i] + model.epsilon);
    weight[class_index(model.train.y[i])] += w;
    total += w;
  }
  for (auto& w : weight) w /= total;
  return ClassScores::from_scores(weight);
}

}  // namespace ser
