#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ser/emotion.hpp"
#include "ser/error.hpp"

namespace ser {

// Per-class scores from one classifier plus its decided label.
struct ClassScores {
  std::array<double, kNumClasses> scores{};
  EmotionClass label = EmotionClass::Angry;

  double operator[](EmotionClass c) const { return scores[class_index(c)]; }

  // Argmax with ties resolved towards the earlier class.
  static ClassScores from_scores(const std::array<double, kNumClasses>& s) {
    ClassScores out;
    out.scores = s;
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c)
      if (s[c] > s[best]) best = c;
    out.label = class_from_index(best);
    return out;
  }
};

// Dense numeric rows with their labels, as consumed by the classifiers.
struct TrainingSet {
  std::vector<std::vector<double>> x;
  std::vector<EmotionClass> y;

  std::size_t size() const { return x.size(); }
  std::size_t dims() const { return x.empty() ? 0 : x.front().size(); }

  std::array<std::size_t, kNumClasses> class_counts() const {
    std::array<std::size_t, kNumClasses> counts{};
    for (auto c : y) ++counts[class_index(c)];
    return counts;
  }

  void check() const {
    if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "rows and labels differ in count");
    for (const auto& row : x)
      if (row.size() != dims()) throw Error(ErrorCode::FeatureMismatch, "ragged training rows");
  }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

inline void check_row_width(std::span<const double> row, std::size_t expected) {
  if (row.size() != expected)
    throw Error(ErrorCode::FeatureMismatch,
                "row has " + std::to_string(row.size()) + " features, model expects " + std::to_string(expected));
}

}  // namespace ser
