#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "ser/detail/rng.hpp"
#include "ser/error.hpp"
#include "ser/models/common.hpp"

namespace ser {

struct NnConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 500;
  std::size_t hidden = 10;
  std::uint64_t seed = 0;
};

// Three-layer perceptron: inputs -> sigmoid hidden layer -> softmax over the
// four emotion classes. Weight matrices are row-major (out x in).
struct NnModel {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::size_t outputs = kNumClasses;
  std::uint64_t seed = 0;
  std::vector<double> w1, b1, w2, b2;

  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  // Flattened as w1, b1, w2, b2.
  std::vector<double> parameters() const {
    std::vector<double> p;
    p.reserve(parameter_count());
    for (const auto* v : {&w1, &b1, &w2, &b2}) p.insert(p.end(), v->begin(), v->end());
    return p;
  }

  void set_parameters(std::span<const double> p) {
    if (p.size() != parameter_count()) throw Error(ErrorCode::LengthMismatch, "parameter count");
    std::size_t off = 0;
    for (auto* v : {&w1, &b1, &w2, &b2}) {
      std::copy(p.begin() + static_cast<std::ptrdiff_t>(off),
                p.begin() + static_cast<std::ptrdiff_t>(off + v->size()), v->begin());
      off += v->size();
    }
  }

  bool operator==(const NnModel&) const = default;
};

// Weights and biases uniform in +-1/sqrt(fan_in).
inline NnModel init_nn(std::size_t inputs, std::size_t hidden, std::uint64_t seed) {
  NnModel m;
  m.inputs = inputs;
  m.hidden = hidden;
  m.seed = seed;
  detail::Rng rng(seed);
  auto fill = [&](std::vector<double>& v, std::size_t n, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    v.resize(n);
    for (auto& x : v) x = rng.uniform(-bound, bound);
  };
  fill(m.w1, hidden * inputs, inputs);
  fill(m.b1, hidden, inputs);
  fill(m.w2, m.outputs * hidden, hidden);
  fill(m.b2, m.outputs, hidden);
  return m;
}

namespace detail {

struct NnActivations {
  std::vector<double> hidden;
  std::array<double, kNumClasses> probs{};
};

inline NnActivations nn_forward(const NnModel& m, std::span<const double> x) {
  NnActivations a;
  a.hidden.resize(m.hidden);
  for (std::size_t h = 0; h < m.hidden; ++h) {
    double z = m.b1[h];
    for (std::size_t i = 0; i < m.inputs; ++i) z += m.w1[h * m.inputs + i] * x[i];
    a.hidden[h] = 1.0 / (1.0 + std::exp(-z));
  }
  std::array<double, kNumClasses> z{};
  for (std::size_t o = 0; o < m.outputs; ++o) {
    double acc = m.b2[o];
    for (std::size_t h = 0; h < m.hidden; ++h) acc += m.w2[o * m.hidden + h] * a.hidden[h];
    z[o] = acc;
  }
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t o = 0; o < m.outputs; ++o) {
    a.probs[o] = std::exp(z[o] - zmax);
    sum += a.probs[o];
  }
  for (auto& p : a.probs) p /= sum;
  return a;
}

// Adds the cross-entropy gradient of one sample to `grad` (layout of parameters()).
inline void nn_accumulate_gradient(const NnModel& m, std::span<const double> x, EmotionClass label,
                                   std::vector<double>& grad, double scale) {
  const auto a = nn_forward(m, x);
  const std::size_t off_b1 = m.w1.size();
  const std::size_t off_w2 = off_b1 + m.b1.size();
  const std::size_t off_b2 = off_w2 + m.w2.size();

  std::array<double, kNumClasses> delta_out{};
  for (std::size_t o = 0; o < m.outputs; ++o)
    delta_out[o] = a.probs[o] - (o == class_index(label) ? 1.0 : 0.0);

  for (std::size_t o = 0; o < m.outputs; ++o) {
    for (std::size_t h = 0; h < m.hidden; ++h) grad[off_w2 + o * m.hidden + h] += scale * delta_out[o] * a.hidden[h];
    grad[off_b2 + o] += scale * delta_out[o];
  }
  for (std::size_t h = 0; h < m.hidden; ++h) {
    double back = 0.0;
    for (std::size_t o = 0; o < m.outputs; ++o) back += m.w2[o * m.hidden + h] * delta_out[o];
    const double dz = back * a.hidden[h] * (1.0 - a.hidden[h]);
    for (std::size_t i = 0; i < m.inputs; ++i) grad[h * m.inputs + i] += scale * dz * x[i];
    grad[off_b1 + h] += scale * dz;
  }
}

}  // namespace detail

// Mean cross-entropy over a batch.
inline double nn_loss(const NnModel& m, const TrainingSet& batch) {
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto a = detail::nn_forward(m, batch.x[i]);
    loss -= std::log(std::max(a.probs[class_index(batch.y[i])], 1e-300));
  }
  return loss / static_cast<double>(batch.size());
}

// Gradient of nn_loss with respect to parameters().
inline std::vector<double> nn_gradient(const NnModel& m, const TrainingSet& batch) {
  std::vector<double> grad(m.parameter_count(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) detail::nn_accumulate_gradient(m, batch.x[i], batch.y[i], grad, scale);
  return grad;
}

// Per-sample SGD with a fresh seeded shuffle each epoch.
inline NnModel train_nn(const TrainingSet& train, const NnConfig& cfg = {}) {
  train.check();
  std::size_t present = 0;
  for (auto c : train.class_counts()) present += c > 0 ? 1 : 0;
  if (present < 2) throw Error(ErrorCode::InvalidDataset, "network needs at least two classes");
  if (cfg.hidden == 0) throw Error(ErrorCode::InvalidConfig, "hidden layer must not be empty");

  NnModel m = init_nn(train.dims(), cfg.hidden, cfg.seed);
  detail::Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(m.parameter_count());
  std::vector<double> params = m.parameters();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (auto idx : order) {
      std::fill(grad.begin(), grad.end(), 0.0);
      detail::nn_accumulate_gradient(m, train.x[idx], train.y[idx], grad, 1.0);
      for (std::size_t p = 0; p < params.size(); ++p) params[p] -= cfg.learning_rate * grad[p];
      m.set_parameters(params);
    }
  }
  return m;
}

inline ClassScores predict_nn(const NnModel& m, std::span<const double> row) {
  check_row_width(row, m.inputs);
  return ClassScores::from_scores(detail::nn_forward(m, row).probs);
}

}  // namespace ser
