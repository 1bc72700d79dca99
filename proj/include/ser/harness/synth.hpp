#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "ser/audio.hpp"
#include "ser/detail/rng.hpp"
#include "ser/emotion.hpp"

namespace ser {

// Voiced tone with an amplitude envelope and a linear pitch glide, padded
// with low-level noise on both sides.
struct ToneSpec {
  double f0_start_hz = 200.0;
  double f0_end_hz = 200.0;
  double amplitude = 0.5;
  double am_rate_hz = 0.0;
  double am_depth = 0.0;  // envelope = 1 - depth * (1 + sin) / 2
  double duration_s = 1.0;
  double pad_s = 0.0;
  double noise = 0.0;  // std-dev of additive Gaussian noise
  std::array<double, 3> harmonics{1.0, 0.0, 0.0};
};

inline AudioClip synthesize_tone(const ToneSpec& spec, int sample_rate_hz, std::uint64_t seed, std::string id = {}) {
  detail::Rng rng(seed);
  const auto pad = static_cast<std::size_t>(std::lround(spec.pad_s * sample_rate_hz));
  const auto body = static_cast<std::size_t>(std::lround(spec.duration_s * sample_rate_hz));
  std::vector<double> samples(2 * pad + body, 0.0);
  double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  double harmonic_sum = 0.0;
  for (double h : spec.harmonics) harmonic_sum += std::abs(h);
  for (std::size_t i = 0; i < body; ++i) {
    const double t = static_cast<double>(i) / sample_rate_hz;
    const double frac = body > 1 ? static_cast<double>(i) / static_cast<double>(body - 1) : 0.0;
    const double f0 = spec.f0_start_hz + (spec.f0_end_hz - spec.f0_start_hz) * frac;
    phase += 2.0 * std::numbers::pi * f0 / sample_rate_hz;
    double v = 0.0;
    for (std::size_t h = 0; h < spec.harmonics.size(); ++h) v += spec.harmonics[h] * std::sin(phase * static_cast<double>(h + 1));
    const double env = 1.0 - spec.am_depth * (1.0 + std::sin(2.0 * std::numbers::pi * spec.am_rate_hz * t)) / 2.0;
    samples[pad + i] = spec.amplitude * env * v / harmonic_sum;
  }
  for (auto& s : samples) s = std::clamp(s + spec.noise * rng.normal(), -1.0, 1.0);
  return AudioClip(std::move(samples), sample_rate_hz, std::move(id));
}

// Per-class generative profile of the synthetic emotion corpus: each class
// owns a pitch band, a glide direction, a loudness and an amplitude-modulation
// pattern.
struct SynthClassProfile {
  double f0_lo, f0_hi;
  double glide_hz;
  double amplitude;
  double am_rate_hz;
  double am_depth;
};

inline SynthClassProfile synth_profile(EmotionClass c) {
  switch (c) {
    case EmotionClass::Angry: return {290.0, 330.0, 30.0, 0.60, 7.0, 0.5};
    case EmotionClass::Happy: return {235.0, 265.0, 15.0, 0.45, 4.5, 0.35};
    case EmotionClass::Neutral: return {185.0, 210.0, 0.0, 0.30, 0.0, 0.0};
    case EmotionClass::Sad: return {150.0, 170.0, -15.0, 0.18, 2.0, 0.2};
  }
  return {};
}

inline ToneSpec synth_tone_for(EmotionClass c, detail::Rng& rng) {
  const auto p = synth_profile(c);
  ToneSpec spec;
  spec.f0_start_hz = rng.uniform(p.f0_lo, p.f0_hi);
  spec.f0_end_hz = spec.f0_start_hz + p.glide_hz * rng.uniform(0.7, 1.3);
  spec.amplitude = p.amplitude * rng.uniform(0.85, 1.15);
  spec.am_rate_hz = p.am_rate_hz * rng.uniform(0.9, 1.1);
  spec.am_depth = p.am_depth;
  spec.duration_s = rng.uniform(0.6, 1.1);
  spec.pad_s = rng.uniform(0.05, 0.1);
  spec.noise = 0.003;
  spec.harmonics = {1.0, rng.uniform(0.2, 0.4), rng.uniform(0.05, 0.15)};
  return spec;
}

struct SynthClip {
  AudioClip clip;
  EmotionClass label;
};

// `per_class` clips for each of the four classes, class-major order.
inline std::vector<SynthClip> synthesize_corpus(std::size_t per_class, std::uint64_t seed, int sample_rate_hz = 16000) {
  std::vector<SynthClip> out;
  detail::Rng rng(seed);
  for (auto c : kAllClasses) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const auto spec = synth_tone_for(c, rng);
      const std::string id = std::string(class_name(c)) + "_" + std::to_string(i);
      out.push_back({synthesize_tone(spec, sample_rate_hz, rng.next(), id), c});
    }
  }
  return out;
}

// Writes the corpus in the generic layout: <dir>/<class>/<class>_<i>.wav.
inline void write_synthetic_corpus(const std::filesystem::path& dir, std::size_t per_class, std::uint64_t seed,
                                   int sample_rate_hz = 16000) {
  for (const auto& s : synthesize_corpus(per_class, seed, sample_rate_hz)) {
    const auto sub = dir / std::string(class_name(s.label));
    std::filesystem::create_directories(sub);
    write_wav16(sub / (s.clip.source_id() + ".wav"), s.clip);
  }
}

}  // namespace ser
