#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ser/audio.hpp"
#include "ser/error.hpp"
#include "ser/fft.hpp"

namespace ser {

inline constexpr std::size_t kNumMfcc = 12;
inline constexpr std::size_t kNumDescriptors = 16;
inline constexpr std::size_t kNumContours = 2 * kNumDescriptors;

// Short-time analysis parameters. Frame and hop are given in milliseconds so
// the same configuration applies to any sample rate.
struct FrameConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  int mel_filters = 26;
  int fft_size = 0;  // 0 selects the next power of two >= frame length
  double preemphasis = 0.97;
  double f0_min_hz = 50.0;
  double f0_max_hz = 500.0;
  double voicing_threshold = 0.55;

  std::size_t frame_length(int sample_rate_hz) const {
    return static_cast<std::size_t>(std::lround(frame_ms * sample_rate_hz / 1000.0));
  }
  std::size_t hop_length(int sample_rate_hz) const {
    return static_cast<std::size_t>(std::lround(hop_ms * sample_rate_hz / 1000.0));
  }
  std::size_t resolved_fft_size(int sample_rate_hz) const {
    return fft_size > 0 ? static_cast<std::size_t>(fft_size) : next_power_of_two(frame_length(sample_rate_hz));
  }

  void validate(int sample_rate_hz) const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
    if (!(hop_ms > 0.0) || !(frame_ms > hop_ms)) fail("require frame_ms > hop_ms > 0");
    if (hop_length(sample_rate_hz) == 0) fail("hop shorter than one sample");
    if (mel_filters <= static_cast<int>(kNumMfcc)) fail("need more than 12 mel filters");
    if (fft_size != 0 &&
        (!is_power_of_two(static_cast<std::size_t>(fft_size)) ||
         static_cast<std::size_t>(fft_size) < frame_length(sample_rate_hz)))
      fail("fft_size must be a power of two no smaller than the frame");
    if (!(preemphasis >= 0.0 && preemphasis < 1.0)) fail("preemphasis must lie in [0, 1)");
    if (!(f0_min_hz > 0.0 && f0_min_hz < f0_max_hz && f0_max_hz < sample_rate_hz / 2.0))
      fail("require 0 < f0_min_hz < f0_max_hz < sample_rate/2");
    if (!(voicing_threshold >= 0.0 && voicing_threshold <= 1.0)) fail("voicing_threshold must lie in [0, 1]");
  }
};

// Contour slots of an LldMatrix. Deltas follow at offset kNumDescriptors.
enum class Descriptor : std::size_t {
  Energy = 0,
  Mfcc1 = 1,  // Mfcc1 .. Mfcc12 occupy 1..12
  Zcr = 13,
  VoicingProb = 14,
  F0 = 15,
};

constexpr std::size_t contour_index(Descriptor d, bool delta = false) {
  return static_cast<std::size_t>(d) + (delta ? kNumDescriptors : 0);
}

inline const std::array<std::string, kNumContours>& contour_names() {
  static const std::array<std::string, kNumContours> names = [] {
    std::array<std::string, kNumContours> n;
    n[0] = "energy";
    for (std::size_t i = 0; i < kNumMfcc; ++i) n[1 + i] = "mfcc" + std::to_string(i + 1);
    n[13] = "zcr";
    n[14] = "voiceprob";
    n[15] = "f0";
    for (std::size_t i = 0; i < kNumDescriptors; ++i) n[kNumDescriptors + i] = "d_" + n[i];
    return n;
  }();
  return names;
}

// 32 frame-level contours of one (trimmed) utterance.
struct LldMatrix {
  std::array<std::vector<double>, kNumContours> contours;

  std::size_t frame_count() const { return contours[0].size(); }
  const std::vector<double>& operator[](std::size_t i) const { return contours[i]; }

  bool operator==(const LldMatrix&) const = default;
};

// Views into the clip's samples; the clip must outlive them.
inline std::vector<std::span<const double>> frame_signal(const AudioClip& clip, const FrameConfig& cfg) {
  const std::size_t len = cfg.frame_length(clip.sample_rate_hz());
  const std::size_t hop = cfg.hop_length(clip.sample_rate_hz());
  if (len == 0 || hop == 0) throw Error(ErrorCode::InvalidConfig, "empty frame or hop");
  if (clip.size() < len)
    throw Error(ErrorCode::TooShort, "clip of " + std::to_string(clip.size()) +
                                         " samples is shorter than one frame of " + std::to_string(len));
  const std::size_t count = 1 + (clip.size() - len) / hop;
  std::vector<std::span<const double>> frames;
  frames.reserve(count);
  const std::span<const double> all(clip.samples());
  for (std::size_t i = 0; i < count; ++i) frames.push_back(all.subspan(i * hop, len));
  return frames;
}

// Root-mean-square amplitude.
inline double frame_energy(std::span<const double> frame) {
  double acc = 0.0;
  for (double s : frame) acc += s * s;
  return std::sqrt(acc / static_cast<double>(frame.size()));
}

// Sign changes between consecutive samples over (length - 1); zero counts as positive.
inline double frame_zcr(std::span<const double> frame) {
  if (frame.size() < 2) return 0.0;
  std::size_t changes = 0;
  for (std::size_t i = 1; i < frame.size(); ++i) {
    if ((frame[i - 1] >= 0.0) != (frame[i] >= 0.0)) ++changes;
  }
  return static_cast<double>(changes) / static_cast<double>(frame.size() - 1);
}

inline std::vector<double> hamming_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
  return w;
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Row-major n x n orthonormal DCT-II basis: B[k][m] = c_k cos(pi k (m + 1/2) / n).
inline std::vector<double> dct_matrix(std::size_t n) {
  std::vector<double> b(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    for (std::size_t m = 0; m < n; ++m)
      b[k * n + m] = scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                                      (static_cast<double>(m) + 0.5) / static_cast<double>(n));
  }
  return b;
}

// Triangular filters on the HTK mel scale spanning 0 .. rate/2, evaluated at
// the FFT bin centres. Row-major filters x (fft_size/2 + 1).
inline std::vector<double> mel_filterbank(int filters, std::size_t fft_size, int sample_rate_hz) {
  const std::size_t bins = fft_size / 2 + 1;
  const auto nf = static_cast<std::size_t>(filters);
  const double mel_hi = hz_to_mel(sample_rate_hz / 2.0);
  std::vector<double> edges(nf + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_hi * static_cast<double>(i) / static_cast<double>(nf + 1));
  std::vector<double> bank(nf * bins, 0.0);
  for (std::size_t j = 0; j < nf; ++j) {
    const double left = edges[j];
    const double centre = edges[j + 1];
    const double right = edges[j + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate_hz / static_cast<double>(fft_size);
      double w = 0.0;
      if (f > left && f <= centre) w = (f - left) / (centre - left);
      else if (f > centre && f < right) w = (right - f) / (right - centre);
      bank[j * bins + k] = w;
    }
  }
  return bank;
}

struct PitchEstimate {
  double f0 = 0.0;
  double voicing_prob = 0.0;
};

// Per-frame analysis with the window, filterbank and DCT precomputed for one
// (config, sample rate, frame length) combination. Immutable after
// construction, so one instance may serve several threads.
class FrameAnalyzer {
 public:
  FrameAnalyzer(const FrameConfig& cfg, int sample_rate_hz, std::size_t frame_length)
      : cfg_(cfg),
        rate_(sample_rate_hz),
        fft_size_(std::max(cfg.resolved_fft_size(sample_rate_hz), next_power_of_two(frame_length))),
        window_(hamming_window(frame_length)),
        bank_(mel_filterbank(cfg.mel_filters, fft_size_, sample_rate_hz)),
        dct_(dct_matrix(static_cast<std::size_t>(cfg.mel_filters))) {}

  std::size_t frame_length() const { return window_.size(); }

  std::array<double, kNumMfcc> mfcc(std::span<const double> frame) const {
    check_length(frame);
    const std::size_t n = frame.size();
    std::vector<double> x(n);
    x[0] = frame[0];
    for (std::size_t i = 1; i < n; ++i) x[i] = frame[i] - cfg_.preemphasis * frame[i - 1];
    for (std::size_t i = 0; i < n; ++i) x[i] *= window_[i];
    const auto mag = magnitude_spectrum(x, fft_size_);

    const auto nf = static_cast<std::size_t>(cfg_.mel_filters);
    const std::size_t bins = mag.size();
    std::vector<double> log_mel(nf);
    for (std::size_t j = 0; j < nf; ++j) {
      double acc = 0.0;
      const double* row = &bank_[j * bins];
      for (std::size_t k = 0; k < bins; ++k) acc += row[k] * mag[k];
      log_mel[j] = std::log(std::max(acc, 1e-10));
    }
    std::array<double, kNumMfcc> out{};
    for (std::size_t c = 0; c < kNumMfcc; ++c) {
      const double* row = &dct_[(c + 1) * nf];
      double acc = 0.0;
      for (std::size_t j = 0; j < nf; ++j) acc += row[j] * log_mel[j];
      out[c] = acc;
    }
    return out;
  }

  // Autocorrelation pitch on the mean-removed, Hamming-windowed frame.
  PitchEstimate pitch(std::span<const double> frame) const {
    check_length(frame);
    const std::size_t n = frame.size();
    double mean = 0.0;
    for (double s : frame) mean += s;
    mean /= static_cast<double>(n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (frame[i] - mean) * window_[i];

    auto acf = [&](std::size_t lag) {
      double acc = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) acc += x[i] * x[i + lag];
      return acc;
    };
    const double r0 = acf(0);
    if (!(r0 > 0.0)) return {};

    const auto lag_lo = static_cast<std::size_t>(std::ceil(rate_ / cfg_.f0_max_hz));
    const auto lag_hi = std::min(static_cast<std::size_t>(std::floor(rate_ / cfg_.f0_min_hz)), n - 1);
    if (lag_lo < 1 || lag_lo > lag_hi) return {};

    std::size_t best_lag = lag_lo;
    double best = acf(lag_lo);
    for (std::size_t lag = lag_lo + 1; lag <= lag_hi; ++lag) {
      const double r = acf(lag);
      if (r > best) {
        best = r;
        best_lag = lag;
      }
    }
    PitchEstimate est;
    est.voicing_prob = std::clamp(best / r0, 0.0, 1.0);
    if (est.voicing_prob >= cfg_.voicing_threshold) est.f0 = rate_ / static_cast<double>(best_lag);
    return est;
  }

 private:
  void check_length(std::span<const double> frame) const {
    if (frame.size() != window_.size())
      throw Error(ErrorCode::InvalidConfig, "frame length does not match analyzer");
  }

  FrameConfig cfg_;
  double rate_;
  std::size_t fft_size_;
  std::vector<double> window_;
  std::vector<double> bank_;
  std::vector<double> dct_;
};

inline std::array<double, kNumMfcc> frame_mfcc(std::span<const double> frame, const FrameConfig& cfg,
                                               int sample_rate_hz) {
  return FrameAnalyzer(cfg, sample_rate_hz, frame.size()).mfcc(frame);
}

inline PitchEstimate frame_pitch(std::span<const double> frame, const FrameConfig& cfg, int sample_rate_hz) {
  return FrameAnalyzer(cfg, sample_rate_hz, frame.size()).pitch(frame);
}

// First-order delta (x[t+1] - x[t-1]) / 2 with edge replication.
inline std::vector<double> delta(std::span<const double> contour) {
  const std::size_t n = contour.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const double prev = contour[t == 0 ? 0 : t - 1];
    const double next = contour[t + 1 < n ? t + 1 : n - 1];
    d[t] = (next - prev) / 2.0;
  }
  return d;
}

// Inclusive [first, last] indices of frames with non-zero pitch.
inline std::pair<std::size_t, std::size_t> voiced_span(std::span<const double> f0) {
  const auto voiced = [](double v) { return v > 0.0; };
  const auto first = std::find_if(f0.begin(), f0.end(), voiced);
  if (first == f0.end()) throw Error(ErrorCode::AllUnvoiced, "no voiced frame");
  const auto last = std::find_if(f0.rbegin(), f0.rend(), voiced);
  return {static_cast<std::size_t>(first - f0.begin()),
          static_cast<std::size_t>(f0.rend() - last) - 1};
}

// Computes the 16 descriptors per frame, trims them to the voiced span and
// appends their deltas.
inline LldMatrix extract_lld(const AudioClip& clip, const FrameConfig& cfg) {
  cfg.validate(clip.sample_rate_hz());
  std::vector<std::span<const double>> frames;
  try {
    frames = frame_signal(clip, cfg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TooShort) throw;
    throw Error(ErrorCode::UtteranceTooShort, "'" + clip.source_id() + "': " + e.what());
  }

  const FrameAnalyzer analyzer(cfg, clip.sample_rate_hz(), frames.front().size());
  std::array<std::vector<double>, kNumDescriptors> raw;
  for (auto& c : raw) c.resize(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto frame = frames[t];
    raw[contour_index(Descriptor::Energy)][t] = frame_energy(frame);
    const auto mfcc = analyzer.mfcc(frame);
    for (std::size_t i = 0; i < kNumMfcc; ++i) raw[contour_index(Descriptor::Mfcc1) + i][t] = mfcc[i];
    raw[contour_index(Descriptor::Zcr)][t] = frame_zcr(frame);
    const auto pitch = analyzer.pitch(frame);
    raw[contour_index(Descriptor::VoicingProb)][t] = pitch.voicing_prob;
    raw[contour_index(Descriptor::F0)][t] = pitch.f0;
  }

  const auto [first, last] = voiced_span(raw[contour_index(Descriptor::F0)]);
  const std::size_t len = last - first + 1;
  if (len < 3)
    throw Error(ErrorCode::UtteranceTooShort,
                "'" + clip.source_id() + "': voiced span of " + std::to_string(len) + " frames");

  LldMatrix lld;
  for (std::size_t i = 0; i < kNumDescriptors; ++i) {
    lld.contours[i].assign(raw[i].begin() + static_cast<std::ptrdiff_t>(first),
                           raw[i].begin() + static_cast<std::ptrdiff_t>(last + 1));
    lld.contours[kNumDescriptors + i] = delta(lld.contours[i]);
  }
  return lld;
}

}  // namespace ser
