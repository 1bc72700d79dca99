#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ser/emotion.hpp"
#include "ser/error.hpp"
#include "ser/lld.hpp"

namespace ser {

inline constexpr std::size_t kNumFunctionals = 11;
inline constexpr std::size_t kNumFeatures = kNumContours * kNumFunctionals;  // 352

enum class Functional : std::size_t {
  Max = 0,
  Min,
  Range,
  PosMax,
  PosMin,
  Mean,
  Slope,
  Offset,
  StdDev,
  Skewness,
  Kurtosis,
};

inline constexpr std::array<const char*, kNumFunctionals> kFunctionalNames = {
    "max", "min", "range", "posmax", "posmin", "mean", "slope", "offset", "stddev", "skew", "kurt"};

constexpr std::size_t feature_index(std::size_t contour, Functional f) {
  return contour * kNumFunctionals + static_cast<std::size_t>(f);
}

// `<contour>_<functional>` for all 352 features in layout order.
inline const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    n.reserve(kNumFeatures);
    for (const auto& c : contour_names())
      for (const char* f : kFunctionalNames) n.push_back(c + "_" + f);
    return n;
  }();
  return names;
}

// Fixed-layout utterance descriptor; `values[contour * 11 + functional]`.
struct FeatureVector {
  std::vector<double> values;
  std::optional<EmotionClass> label;
  std::string source_id;

  bool operator==(const FeatureVector&) const = default;
};

// [max, min, range, pos_max, pos_min, mean, slope, offset, stddev, skewness, kurtosis]
// Moments are population moments; skewness and kurtosis (non-excess) are 0 for
// a flat contour.
inline std::array<double, kNumFunctionals> apply_functionals(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 3) throw Error(ErrorCode::ContourTooShort, "contour of " + std::to_string(n) + " frames");
  const double count = static_cast<double>(n);

  const auto max_it = std::max_element(x.begin(), x.end());
  const auto min_it = std::min_element(x.begin(), x.end());

  double mean = 0.0;
  for (double v : x) mean += v;
  mean = std::clamp(mean / count, *min_it, *max_it);  // rounding must not escape [min, max]

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= count;
  m3 /= count;
  m4 /= count;
  const double sigma = std::sqrt(m2);

  // Least squares x[t] ~ slope * t + offset over t = 0..n-1.
  const double t_mean = (count - 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double dt = static_cast<double>(t) - t_mean;
    sxy += dt * (x[t] - mean);
    sxx += dt * dt;
  }
  const double slope = sxy / sxx;
  const double offset = mean - slope * t_mean;

  std::array<double, kNumFunctionals> out{};
  out[static_cast<std::size_t>(Functional::Max)] = *max_it;
  out[static_cast<std::size_t>(Functional::Min)] = *min_it;
  out[static_cast<std::size_t>(Functional::Range)] = *max_it - *min_it;
  out[static_cast<std::size_t>(Functional::PosMax)] = static_cast<double>(max_it - x.begin());
  out[static_cast<std::size_t>(Functional::PosMin)] = static_cast<double>(min_it - x.begin());
  out[static_cast<std::size_t>(Functional::Mean)] = mean;
  out[static_cast<std::size_t>(Functional::Slope)] = slope;
  out[static_cast<std::size_t>(Functional::Offset)] = offset;
  out[static_cast<std::size_t>(Functional::StdDev)] = sigma;
  if (sigma >= 1e-12) {
    out[static_cast<std::size_t>(Functional::Skewness)] = m3 / (sigma * sigma * sigma);
    out[static_cast<std::size_t>(Functional::Kurtosis)] = m4 / (m2 * m2);
  }
  return out;
}

inline FeatureVector build_feature_vector(const LldMatrix& lld, std::string source_id = {},
                                          std::optional<EmotionClass> label = std::nullopt) {
  FeatureVector fv;
  fv.values.reserve(kNumFeatures);
  for (const auto& contour : lld.contours) {
    const auto block = apply_functionals(contour);
    fv.values.insert(fv.values.end(), block.begin(), block.end());
  }
  fv.label = label;
  fv.source_id = std::move(source_id);
  return fv;
}

}  // namespace ser
