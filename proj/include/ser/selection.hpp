#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ser/dataset.hpp"
#include "ser/detail/text.hpp"
#include "ser/error.hpp"
#include "ser/functionals.hpp"

namespace ser {

// Equal-frequency binning. Boundary k sits at the ceil(k*n/bins)-th smallest
// value; a value equal to a boundary goes to the lower bin.
inline std::vector<int> discretize_equal_frequency(std::span<const double> column, int bins = 10) {
  if (column.empty()) return {};
  if (bins < 2) throw Error(ErrorCode::InvalidConfig, "need at least two bins");
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> bounds;
  bounds.reserve(static_cast<std::size_t>(bins) - 1);
  for (int k = 1; k < bins; ++k) {
    const std::size_t rank = (static_cast<std::size_t>(k) * n + static_cast<std::size_t>(bins) - 1) /
                             static_cast<std::size_t>(bins);
    bounds.push_back(sorted[std::max<std::size_t>(rank, 1) - 1]);
  }
  std::vector<int> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Number of boundaries strictly below the value.
    ids[i] = static_cast<int>(std::lower_bound(bounds.begin(), bounds.end(), column[i]) - bounds.begin());
  }
  return ids;
}

namespace detail {

// Entropy in bits of a frequency table. Counts are summed in ascending order so
// that the result depends only on the multiset of counts.
inline double entropy_from_counts(std::vector<std::size_t> counts, std::size_t total) {
  std::sort(counts.begin(), counts.end());
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

template <typename Key>
std::vector<std::size_t> run_lengths(std::vector<Key> keys) {
  std::sort(keys.begin(), keys.end());
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    counts.push_back(j - i);
    i = j;
  }
  return counts;
}

}  // namespace detail

inline double entropy_bits(std::span<const int> x) {
  return detail::entropy_from_counts(detail::run_lengths(std::vector<int>(x.begin(), x.end())), x.size());
}

inline double joint_entropy_bits(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "columns differ in length");
  std::vector<std::pair<int, int>> pairs(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) pairs[i] = {x[i], y[i]};
  return detail::entropy_from_counts(detail::run_lengths(std::move(pairs)), x.size());
}

// SU = 2 IG(X;Y) / (H(X) + H(Y)); 0 when both entropies vanish.
inline double symmetrical_uncertainty(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "columns differ in length");
  if (x.empty()) throw Error(ErrorCode::LengthMismatch, "columns are empty");
  const double hx = entropy_bits(x);
  const double hy = entropy_bits(y);
  const double denom = hx + hy;
  if (denom <= 0.0) return 0.0;
  const double gain = std::max(0.0, denom - joint_entropy_bits(x, y));
  return std::clamp(2.0 * gain / denom, 0.0, 1.0);
}

struct RankedFeature {
  std::size_t index = 0;
  double score = 0.0;

  bool operator==(const RankedFeature&) const = default;
};

namespace detail {

inline void sort_ranking(std::vector<RankedFeature>& r) {
  std::sort(r.begin(), r.end(), [](const RankedFeature& a, const RankedFeature& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
}

}  // namespace detail

// Fast correlation-based filter: relevance threshold on SU-to-class, then
// removal of every feature that an earlier kept feature predicts at least as
// well as the class does.
inline std::vector<RankedFeature> fcbf_rank(const LabeledDataset& data, double delta = 0.0, int bins = 10) {
  data.validate();
  const std::size_t dim = data.dimension();
  const auto labels = data.labels();
  std::vector<std::vector<int>> binned(dim);
  std::vector<RankedFeature> relevant;
  for (std::size_t j = 0; j < dim; ++j) {
    binned[j] = discretize_equal_frequency(data.column(j), bins);
    const double su = symmetrical_uncertainty(binned[j], labels);
    if (su > delta) relevant.push_back({j, su});
  }
  detail::sort_ranking(relevant);

  std::vector<bool> removed(relevant.size(), false);
  for (std::size_t p = 0; p < relevant.size(); ++p) {
    if (removed[p]) continue;
    const auto& pred = binned[relevant[p].index];
    for (std::size_t q = p + 1; q < relevant.size(); ++q) {
      if (removed[q]) continue;
      if (symmetrical_uncertainty(pred, binned[relevant[q].index]) >= relevant[q].score) removed[q] = true;
    }
  }
  std::vector<RankedFeature> kept;
  for (std::size_t p = 0; p < relevant.size(); ++p)
    if (!removed[p]) kept.push_back(relevant[p]);
  return kept;
}

inline constexpr double kFisherGuard = 1e-12;

// Between-class scatter over pooled within-class scatter, per feature:
// sum_i n_i (mu_i - mu)^2 / (sum_i n_i sigma_i^2 + guard).
inline double fisher_score(std::span<const double> column, std::span<const int> labels) {
  if (column.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "column and labels differ");
  std::array<double, kNumClasses> sum{}, count{};
  double total = 0.0;
  for (std::size_t r = 0; r < column.size(); ++r) {
    const auto c = static_cast<std::size_t>(labels[r]);
    sum[c] += column[r];
    count[c] += 1.0;
    total += column[r];
  }
  const double mu = total / static_cast<double>(column.size());
  std::array<double, kNumClasses> mean{};
  for (std::size_t c = 0; c < kNumClasses; ++c) mean[c] = count[c] > 0 ? sum[c] / count[c] : 0.0;
  std::array<double, kNumClasses> sq{};
  for (std::size_t r = 0; r < column.size(); ++r) {
    const auto c = static_cast<std::size_t>(labels[r]);
    const double d = column[r] - mean[c];
    sq[c] += d * d;
  }
  double between = 0.0, within = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (count[c] == 0) continue;
    between += count[c] * (mean[c] - mu) * (mean[c] - mu);
    within += sq[c];  // n_i * (population variance of class i)
  }
  return between / (within + kFisherGuard);
}

inline std::vector<RankedFeature> fisher_rank(const LabeledDataset& data) {
  data.validate();
  const auto labels = data.labels();
  std::vector<RankedFeature> ranking;
  ranking.reserve(data.dimension());
  for (std::size_t j = 0; j < data.dimension(); ++j) ranking.push_back({j, fisher_score(data.column(j), labels)});
  detail::sort_ranking(ranking);
  return ranking;
}

struct SelectedFeatureSet {
  std::vector<std::size_t> indices;
  std::map<std::size_t, double> su_scores;
  std::map<std::size_t, double> fisher_scores;
  std::vector<RankedFeature> fcbf_ranking;
  std::vector<RankedFeature> fisher_ranking;
  std::size_t target = 0;
  // Set when fewer than `target` features are ranked by both methods; the
  // indices then hold every common feature found.
  bool shortfall = false;

  std::size_t size() const { return indices.size(); }

  std::vector<double> project(std::span<const double> row) const {
    std::vector<double> out(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] >= row.size())
        throw Error(ErrorCode::FeatureMismatch, "selected index " + std::to_string(indices[i]) +
                                                    " outside a row of " + std::to_string(row.size()));
      out[i] = row[indices[i]];
    }
    return out;
  }
};

// Grows K from `target` until the top-K prefixes of both rankings share at
// least `target` features, then keeps the `target` with the smallest rank sum.
inline SelectedFeatureSet combine_rankings(const std::vector<RankedFeature>& fcbf,
                                           const std::vector<RankedFeature>& fisher, std::size_t target = 12) {
  if (fcbf.empty() || fisher.empty()) throw Error(ErrorCode::InvalidDataset, "empty ranking");
  if (target == 0) throw Error(ErrorCode::InvalidConfig, "target must be positive");

  std::map<std::size_t, std::size_t> fcbf_pos, fisher_pos;
  for (std::size_t i = 0; i < fcbf.size(); ++i) fcbf_pos.emplace(fcbf[i].index, i);
  for (std::size_t i = 0; i < fisher.size(); ++i) fisher_pos.emplace(fisher[i].index, i);

  const std::size_t k_max = std::max(fcbf.size(), fisher.size());
  std::vector<std::size_t> common;
  for (std::size_t k = target;; ++k) {
    common.clear();
    const std::size_t kf = std::min(k, fcbf.size());
    for (std::size_t i = 0; i < kf; ++i) {
      const auto it = fisher_pos.find(fcbf[i].index);
      if (it != fisher_pos.end() && it->second < k) common.push_back(fcbf[i].index);
    }
    if (common.size() >= target || k >= k_max) break;
  }

  std::sort(common.begin(), common.end(), [&](std::size_t a, std::size_t b) {
    const std::size_t sa = fcbf_pos.at(a) + fisher_pos.at(a);
    const std::size_t sb = fcbf_pos.at(b) + fisher_pos.at(b);
    if (sa != sb) return sa < sb;
    return a < b;
  });

  SelectedFeatureSet out;
  out.target = target;
  out.shortfall = common.size() < target;
  if (common.size() > target) common.resize(target);
  out.indices = common;
  for (auto idx : out.indices) {
    out.su_scores[idx] = fcbf[fcbf_pos.at(idx)].score;
    out.fisher_scores[idx] = fisher[fisher_pos.at(idx)].score;
  }
  out.fcbf_ranking = fcbf;
  out.fisher_ranking = fisher;
  return out;
}

struct SelectionConfig {
  int bins = 10;
  double delta = 0.0;
  std::size_t target = 12;
};

inline SelectedFeatureSet select_features(const LabeledDataset& data, const SelectionConfig& cfg = {}) {
  return combine_rankings(fcbf_rank(data, cfg.delta, cfg.bins), fisher_rank(data), cfg.target);
}

// `#version=1` followed by one `index,column_name,su,fisher` line per feature.
inline std::string format_selection(const SelectedFeatureSet& sel) {
  const auto& names = feature_names();
  std::string out = "#version=1\n";
  for (auto idx : sel.indices) {
    out += std::to_string(idx) + "," + (idx < names.size() ? names[idx] : "f" + std::to_string(idx)) + "," +
           detail::format_double(sel.su_scores.at(idx)) + "," + detail::format_double(sel.fisher_scores.at(idx)) +
           "\n";
  }
  return out;
}

inline SelectedFeatureSet parse_selection(std::string_view text) {
  const auto lines = detail::lines(text);
  if (lines.empty() || detail::trim(lines[0]) != "#version=1")
    throw Error(ErrorCode::MalformedFile, "selection file lacks #version=1 header");
  const auto& names = feature_names();
  SelectedFeatureSet sel;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = detail::trim(lines[i]);
    if (line.empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != 4) throw Error(ErrorCode::MalformedFile, "selection line " + std::to_string(i + 1));
    const auto idx = detail::parse_int(cells[0]);
    const auto su = detail::parse_double(cells[2]);
    const auto fs = detail::parse_double(cells[3]);
    if (!idx || *idx < 0 || !su || !fs)
      throw Error(ErrorCode::MalformedFile, "selection line " + std::to_string(i + 1));
    const auto index = static_cast<std::size_t>(*idx);
    if (index < names.size() && names[index] != cells[1])
      throw Error(ErrorCode::SchemaMismatch, "selection line " + std::to_string(i + 1) + " names '" +
                                                 std::string(cells[1]) + "' but index " +
                                                 std::to_string(index) + " is '" + names[index] + "'");
    if (std::find(sel.indices.begin(), sel.indices.end(), index) != sel.indices.end())
      throw Error(ErrorCode::MalformedFile, "duplicate index " + std::to_string(index));
    sel.indices.push_back(index);
    sel.su_scores[index] = *su;
    sel.fisher_scores[index] = *fs;
  }
  if (sel.indices.empty()) throw Error(ErrorCode::MalformedFile, "selection file lists no features");
  sel.target = sel.indices.size();
  return sel;
}

}  // namespace ser
