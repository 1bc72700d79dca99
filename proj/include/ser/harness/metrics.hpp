#pragma once

#include <array>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ser/emotion.hpp"
#include "ser/error.hpp"

namespace ser {

inline constexpr std::size_t kNoDecisionColumn = kNumClasses;

// Rows are true classes; columns are predicted classes plus a trailing
// no-decision column (only ever non-zero for the ensemble).
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumClasses + 1>, kNumClasses> counts{};
  bool has_no_decision = false;

  void add(EmotionClass truth, std::optional<EmotionClass> predicted) {
    ++counts[class_index(truth)][predicted ? class_index(*predicted) : kNoDecisionColumn];
  }

  std::size_t row_total(EmotionClass truth) const {
    std::size_t n = 0;
    for (auto v : counts[class_index(truth)]) n += v;
    return n;
  }

  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : kAllClasses) n += row_total(c);
    return n;
  }

  // Row-normalised percentage; 0 for an empty row.
  double percent(EmotionClass truth, std::size_t column) const {
    const auto n = row_total(truth);
    return n == 0 ? 0.0 : 100.0 * static_cast<double>(counts[class_index(truth)][column]) / static_cast<double>(n);
  }

  double class_accuracy(EmotionClass c) const { return percent(c, class_index(c)); }
  double cant_decide_rate(EmotionClass c) const { return percent(c, kNoDecisionColumn); }
  double misclassification_rate(EmotionClass c) const {
    return row_total(c) == 0 ? 0.0 : 100.0 - class_accuracy(c) - cant_decide_rate(c);
  }

  // Unweighted mean of per-class accuracies over classes present in the test set.
  double average_accuracy() const {
    double acc = 0.0;
    std::size_t present = 0;
    for (auto c : kAllClasses) {
      if (row_total(c) == 0) continue;
      acc += class_accuracy(c);
      ++present;
    }
    return present == 0 ? 0.0 : acc / static_cast<double>(present);
  }

  double overall_cant_decide_rate() const {
    const auto n = total();
    std::size_t none = 0;
    for (auto c : kAllClasses) none += counts[class_index(c)][kNoDecisionColumn];
    return n == 0 ? 0.0 : 100.0 * static_cast<double>(none) / static_cast<double>(n);
  }

  // Fraction of all test rows predicted correctly, in percent.
  double overall_accuracy() const {
    const auto n = total();
    std::size_t ok = 0;
    for (auto c : kAllClasses) ok += counts[class_index(c)][class_index(c)];
    return n == 0 ? 0.0 : 100.0 * static_cast<double>(ok) / static_cast<double>(n);
  }
};

inline ConfusionMatrix evaluate(std::span<const EmotionClass> truth, std::span<const std::optional<EmotionClass>> predicted,
                                bool with_no_decision = false) {
  if (truth.size() != predicted.size()) throw Error(ErrorCode::LengthMismatch, "truth and predictions differ");
  if (truth.empty()) throw Error(ErrorCode::EmptyTestSet, "nothing to evaluate");
  ConfusionMatrix m;
  m.has_no_decision = with_no_decision;
  for (std::size_t i = 0; i < truth.size(); ++i) m.add(truth[i], predicted[i]);
  return m;
}

// Final figure over several corpora: the plain mean of their average accuracies.
inline double combined_average_accuracy(std::span<const ConfusionMatrix> runs) {
  if (runs.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& r : runs) acc += r.average_accuracy();
  return acc / static_cast<double>(runs.size());
}

namespace detail {

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace detail

// Per-class percentage table in the usual confusion-matrix layout.
inline std::string format_confusion_table(const ConfusionMatrix& m, std::string_view title) {
  constexpr std::size_t w = 14;
  std::string out = std::string(title) + "\n";
  out += detail::pad("Class", 10);
  for (auto c : kAllClasses) out += detail::pad(std::string(class_title(c)) + " (%)", w);
  if (m.has_no_decision) out += detail::pad("No decision (%)", w + 2);
  out += "\n";
  for (auto t : kAllClasses) {
    out += detail::pad(std::string(class_title(t)), 10);
    for (auto p : kAllClasses) out += detail::pad(detail::fixed2(m.percent(t, class_index(p))), w);
    if (m.has_no_decision) out += detail::pad(detail::fixed2(m.percent(t, kNoDecisionColumn)), w + 2);
    out += "  (n=" + std::to_string(m.row_total(t)) + ")\n";
  }
  out += "Average accuracy: " + detail::fixed2(m.average_accuracy()) + "%\n";
  return out;
}

// Accuracy / misclassification / can't-decide summary for the voting ensemble.
inline std::string format_decision_table(const ConfusionMatrix& m, std::string_view title) {
  std::string out = std::string(title) + "\n";
  out += detail::pad("Class", 10) + detail::pad("Accuracy (%)", 16) + detail::pad("Misclassification (%)", 24) +
         "Can't Decide (%)\n";
  for (auto c : kAllClasses) {
    out += detail::pad(std::string(class_title(c)), 10) + detail::pad(detail::fixed2(m.class_accuracy(c)), 16) +
           detail::pad(detail::fixed2(m.misclassification_rate(c)), 24) + detail::fixed2(m.cant_decide_rate(c)) + "\n";
  }
  out += "Average accuracy: " + detail::fixed2(m.average_accuracy()) + "%, can't decide overall: " +
         detail::fixed2(m.overall_cant_decide_rate()) + "%\n";
  return out;
}

}  // namespace ser
