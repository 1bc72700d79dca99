#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ser/emotion.hpp"
#include "ser/error.hpp"
#include "ser/functionals.hpp"
#include "ser/models/knn.hpp"
#include "ser/models/nn.hpp"
#include "ser/models/standardizer.hpp"
#include "ser/models/svm.hpp"
#include "ser/models/tree.hpp"
#include "ser/selection.hpp"

namespace ser {

enum class ClassifierKind : std::size_t { Knn = 0, Tree = 1, Nn = 2, Svm = 3 };

inline constexpr std::size_t kNumClassifiers = 4;
inline constexpr std::array<ClassifierKind, kNumClassifiers> kAllClassifiers = {
    ClassifierKind::Knn, ClassifierKind::Tree, ClassifierKind::Nn, ClassifierKind::Svm};

constexpr std::string_view classifier_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::Knn: return "knn";
    case ClassifierKind::Tree: return "tree";
    case ClassifierKind::Nn: return "nn";
    case ClassifierKind::Svm: return "svm";
  }
  return "?";
}

struct Vote {
  ClassifierKind kind;
  EmotionClass label;
};

struct EnsembleDecision {
  std::optional<EmotionClass> outcome;  // nullopt means no decision
  std::array<EmotionClass, kNumClassifiers> votes{};  // indexed by ClassifierKind
  std::size_t agreement = 0;  // 0 when no decision

  bool decided() const { return outcome.has_value(); }
  bool operator==(const EnsembleDecision&) const = default;
};

// A class wins when it alone holds the most votes and has at least two.
// A 2-2 split or four different votes yields no decision.
inline EnsembleDecision majority_vote(std::span<const Vote> votes) {
  if (votes.size() != kNumClassifiers)
    throw Error(ErrorCode::WrongArity, "expected 4 votes, got " + std::to_string(votes.size()));
  EnsembleDecision d;
  std::array<bool, kNumClassifiers> seen{};
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& v : votes) {
    const auto k = static_cast<std::size_t>(v.kind);
    if (k >= kNumClassifiers || seen[k]) throw Error(ErrorCode::WrongArity, "one vote per classifier kind");
    seen[k] = true;
    d.votes[k] = v.label;
    ++counts[class_index(v.label)];
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c)
    if (counts[c] > counts[best]) best = c;
  std::size_t holders = 0;
  for (auto n : counts) holders += n == counts[best] ? 1 : 0;
  if (counts[best] >= 2 && holders == 1) {
    d.outcome = class_from_index(best);
    d.agreement = counts[best];
  }
  return d;
}

// Everything needed to turn a 352-value feature vector into votes.
struct EnsembleModel {
  SelectedFeatureSet selection;
  Standardizer standardizer;
  KnnModel knn;
  TreeModel tree;
  NnModel nn;
  SvmModel svm;

  // Throws FeatureMismatch unless all parts agree on the selected width.
  void check_consistent() const {
    const std::size_t d = selection.size();
    auto check = [&](std::size_t got, std::string_view what) {
      if (got != d)
        throw Error(ErrorCode::FeatureMismatch, std::string(what) + " expects " + std::to_string(got) +
                                                    " features but the selection has " + std::to_string(d));
    };
    check(standardizer.dims(), "standardizer");
    check(knn.dims(), "knn");
    check(tree.num_features, "tree");
    check(nn.inputs, "nn");
    check(svm.num_features, "svm");
  }

  std::vector<double> prepare(const FeatureVector& row) const {
    if (row.values.size() != kNumFeatures)
      throw Error(ErrorCode::FeatureMismatch, "feature vector has " + std::to_string(row.values.size()) +
                                                  " values, expected " + std::to_string(kNumFeatures));
    return standardizer.apply(selection.project(row.values));
  }

  std::array<ClassScores, kNumClassifiers> classify(const FeatureVector& row) const {
    const auto x = prepare(row);
    return {predict_knn(knn, x), predict_tree(tree, x), predict_nn(nn, x), predict_svm(svm, x)};
  }
};

inline EnsembleDecision decide(const std::array<ClassScores, kNumClassifiers>& scores) {
  std::array<Vote, kNumClassifiers> votes{};
  for (auto k : kAllClassifiers) votes[static_cast<std::size_t>(k)] = {k, scores[static_cast<std::size_t>(k)].label};
  return majority_vote(votes);
}

inline EnsembleDecision ensemble_predict(const EnsembleModel& model, const FeatureVector& row) {
  return decide(model.classify(row));
}

}  // namespace ser
