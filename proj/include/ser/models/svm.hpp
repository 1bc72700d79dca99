#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "ser/error.hpp"
#include "ser/models/common.hpp"

namespace ser {

struct SvmConfig {
  double c = 1.0;
  double tol = 1e-3;
  std::size_t max_updates = 100000;
};

// Linear soft-margin classifier for one class pair. Labels are +1 for
// `positive`, -1 for `negative`; the decision value is w.x - b.
struct BinarySvm {
  EmotionClass positive = EmotionClass::Angry;
  EmotionClass negative = EmotionClass::Happy;
  std::vector<double> w;
  double b = 0.0;
  // Support rows (alpha > 0) with their dual coefficients and +-1 labels.
  std::vector<std::vector<double>> support;
  std::vector<double> alphas;
  std::vector<int> labels;
  bool converged = true;
  std::size_t updates = 0;

  double decision(std::span<const double> x) const {
    double acc = -b;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
    return acc;
  }

  // Sum of alpha_i * L_i over the support rows.
  double dual_balance() const {
    double s = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) s += alphas[i] * labels[i];
    return s;
  }

  bool operator==(const BinarySvm&) const = default;
};

// Solves  min 1/2 a'Qa - sum(a)  s.t. 0 <= a <= C, sum(a_i L_i) = 0  with
// Q_ij = L_i L_j x_i.x_j, updating the maximal KKT-violating pair each step.
inline BinarySvm train_binary_svm(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                                  const SvmConfig& cfg = {}) {
  const std::size_t n = x.size();
  if (n != y.size()) throw Error(ErrorCode::LengthMismatch, "rows and labels differ in count");
  const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
  const bool has_neg = std::find(y.begin(), y.end(), -1) != y.end();
  if (!has_pos || !has_neg) throw Error(ErrorCode::DegeneratePair, "both sides of the pair need rows");
  if (!(cfg.c > 0.0)) throw Error(ErrorCode::InvalidConfig, "C must be positive");
  const double c = cfg.c;
  constexpr double kTau = 1e-12;

  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double k = 0.0;
      for (std::size_t d = 0; d < x[i].size(); ++d) k += x[i][d] * x[j][d];
      q[i * n + j] = q[j * n + i] = y[i] * y[j] * k;
    }

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0); };
  auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c); };

  BinarySvm model;
  model.converged = false;
  for (model.updates = 0; model.updates < cfg.max_updates; ++model.updates) {
    std::size_t i = n, j = n;
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > g_max) {
        g_max = v;
        i = t;
      }
      if (in_low(t) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    if (i == n || j == n || g_max - g_min < cfg.tol) {
      model.converged = true;
      break;
    }

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    const double qii = q[i * n + i], qjj = q[j * n + j], qij = q[i * n + j];
    if (y[i] != y[j]) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q[i * n + t] * di + q[j * n + t] * dj;
  }

  // Bias: average over free coefficients, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  model.b = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;

  const std::size_t dims = x.front().size();
  model.w.assign(dims, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0) continue;
    for (std::size_t d = 0; d < dims; ++d) model.w[d] += alpha[t] * y[t] * x[t][d];
    model.support.push_back(x[t]);
    model.alphas.push_back(alpha[t]);
    model.labels.push_back(y[t]);
  }
  return model;
}

// One-vs-one over the six class pairs, in order (A,H) (A,N) (A,S) (H,N) (H,S) (N,S).
struct SvmModel {
  std::vector<BinarySvm> pairs;
  double c = 1.0;
  std::size_t num_features = 0;

  bool converged() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const BinarySvm& p) { return p.converged; });
  }
  bool operator==(const SvmModel&) const = default;
};

inline SvmModel train_svm(const TrainingSet& train, const SvmConfig& cfg = {}) {
  train.check();
  SvmModel model;
  model.c = cfg.c;
  model.num_features = train.dims();
  for (std::size_t a = 0; a < kNumClasses; ++a) {
    for (std::size_t b = a + 1; b < kNumClasses; ++b) {
      std::vector<std::vector<double>> x;
      std::vector<int> y;
      for (std::size_t i = 0; i < train.size(); ++i) {
        const auto c = class_index(train.y[i]);
        if (c == a || c == b) {
          x.push_back(train.x[i]);
          y.push_back(c == a ? 1 : -1);
        }
      }
      try {
        auto pair = train_binary_svm(x, y, cfg);
        pair.positive = class_from_index(a);
        pair.negative = class_from_index(b);
        model.pairs.push_back(std::move(pair));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegeneratePair) throw;
        throw Error(ErrorCode::DegeneratePair, std::string("pair ") + std::string(class_name(class_from_index(a))) +
                                                   "/" + std::string(class_name(class_from_index(b))) +
                                                   " lacks rows on one side");
      }
    }
  }
  return model;
}

// Scores are vote counts; ties go to the class with the larger summed
// |decision value| over the pairs it won, then to the earlier class.
inline ClassScores predict_svm(const SvmModel& model, std::span<const double> row) {
  check_row_width(row, model.num_features);
  std::array<double, kNumClasses> votes{};
  std::array<double, kNumClasses> margin{};
  for (const auto& p : model.pairs) {
    const double f = p.decision(row);
    const EmotionClass winner = f > 0.0 ? p.positive : p.negative;
    votes[class_index(winner)] += 1.0;
    margin[class_index(winner)] += std::abs(f);
  }
  ClassScores out;
  out.scores = votes;
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && margin[c] > margin[best])) best = c;
  }
  out.label = class_from_index(best);
  return out;
}

}  // namespace ser
