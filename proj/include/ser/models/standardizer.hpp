#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ser/error.hpp"
#include "ser/models/common.hpp"

namespace ser {

inline constexpr double kVarianceGuard = 1e-12;

// Per-feature z-score using training statistics only. Features without
// training variance map to 0.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stddevs;

  std::size_t dims() const { return means.size(); }

  std::vector<double> apply(std::span<const double> row) const {
    check_row_width(row, means.size());
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j)
      out[j] = stddevs[j] < kVarianceGuard ? 0.0 : (row[j] - means[j]) / stddevs[j];
    return out;
  }

  bool operator==(const Standardizer&) const = default;
};

inline Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2) throw Error(ErrorCode::TooFewRows, "standardizer needs at least two rows");
  const std::size_t dims = rows.front().size();
  Standardizer s;
  s.means.assign(dims, 0.0);
  s.stddevs.assign(dims, 0.0);
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    check_row_width(r, dims);
    for (std::size_t j = 0; j < dims; ++j) s.means[j] += r[j];
  }
  for (auto& m : s.means) m /= n;
  for (const auto& r : rows)
    for (std::size_t j = 0; j < dims; ++j) s.stddevs[j] += (r[j] - s.means[j]) * (r[j] - s.means[j]);
  for (auto& v : s.stddevs) {
    v = std::sqrt(v / n);
    if (v < kVarianceGuard) v = 0.0;
  }
  return s;
}

}  // namespace ser
