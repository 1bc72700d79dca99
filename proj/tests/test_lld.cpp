#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "ser/fft.hpp"
#include "ser/lld.hpp"

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> sine(double hz, std::size_t n, int rate, double amp = 1.0, double phase_samples = 0.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = amp * std::sin(2.0 * kPi * hz * (static_cast<double>(i) - phase_samples) / rate);
  return v;
}

// Straightforward re-statement of the MFCC recipe with a naive DFT.
std::vector<double> reference_mfcc(const std::vector<double>& frame, int rate) {
  const std::size_t n = frame.size();
  std::size_t nfft = 1;
  while (nfft < n) nfft *= 2;
  std::vector<double> x(nfft, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double pre = i == 0 ? frame[0] : frame[i] - 0.97 * frame[i - 1];
    x[i] = pre * (0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1)));
  }
  std::vector<double> mag(nfft / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < nfft; ++t)
      acc += x[t] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * t) / static_cast<double>(nfft));
    mag[k] = std::abs(acc);
  }
  auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const int filters = 26;
  std::vector<double> logs(filters);
  for (int j = 0; j < filters; ++j) {
    const double lo = hz(mel(rate / 2.0) * j / (filters + 1));
    const double mid = hz(mel(rate / 2.0) * (j + 1) / (filters + 1));
    const double hi = hz(mel(rate / 2.0) * (j + 2) / (filters + 1));
    double e = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
      const double f = static_cast<double>(k) * rate / static_cast<double>(nfft);
      double w = 0.0;
      if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
      e += w * mag[k];
    }
    logs[static_cast<std::size_t>(j)] = std::log(std::max(e, 1e-10));
  }
  std::vector<double> out(12);
  for (int c = 1; c <= 12; ++c) {
    double acc = 0.0;
    for (int j = 0; j < filters; ++j) acc += logs[static_cast<std::size_t>(j)] * std::cos(kPi * c * (j + 0.5) / filters);
    out[static_cast<std::size_t>(c - 1)] = acc * std::sqrt(2.0 / filters);
  }
  return out;
}

TEST(Fft, MatchesNaiveDft) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> x(300);
  for (auto& v : x) v = u(gen);
  const auto mag = ser::magnitude_spectrum(x, 512);
  ASSERT_EQ(mag.size(), 257u);
  for (std::size_t k = 0; k < mag.size(); k += 17) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) acc += x[t] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * t) / 512.0);
    EXPECT_NEAR(mag[k], std::abs(acc), 1e-9);
  }
}

TEST(Framing, FrameCount) {
  const ser::FrameConfig cfg;
  const ser::AudioClip one_second(std::vector<double>(16000, 0.0), 16000);
  const auto frames = ser::frame_signal(one_second, cfg);
  EXPECT_EQ(frames.size(), 98u);
  EXPECT_EQ(frames.front().size(), 400u);
  EXPECT_EQ(frames[1].data() - frames[0].data(), 160);

  EXPECT_EQ(ser::frame_signal(ser::AudioClip(std::vector<double>(400, 0.0), 16000), cfg).size(), 1u);
  try {
    ser::frame_signal(ser::AudioClip(std::vector<double>(399, 0.0), 16000), cfg);
    FAIL();
  } catch (const ser::Error& e) {
    EXPECT_EQ(e.code(), ser::ErrorCode::TooShort);
  }
}

TEST(Framing, ConfigValidation) {
  ser::FrameConfig cfg;
  cfg.hop_ms = 30;
  EXPECT_THROW(cfg.validate(16000), ser::Error);
  cfg = {};
  cfg.f0_max_hz = 9000;
  EXPECT_THROW(cfg.validate(16000), ser::Error);
  cfg = {};
  cfg.preemphasis = 1.0;
  EXPECT_THROW(cfg.validate(16000), ser::Error);
  EXPECT_NO_THROW(ser::FrameConfig{}.validate(16000));
}

TEST(Energy, Cases) {
  EXPECT_EQ(ser::frame_energy(std::vector<double>(400, 0.0)), 0.0);
  EXPECT_DOUBLE_EQ(ser::frame_energy(std::vector<double>(400, 0.5)), 0.5);
  // 400 samples of 100 Hz at 16 kHz = 2.5 periods; use 320 for whole periods.
  EXPECT_NEAR(ser::frame_energy(sine(100.0, 320, 16000)), 1.0 / std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(ser::frame_energy(sine(200.0, 400, 16000)), 0.70711, 1e-3);
}

TEST(Zcr, Cases) {
  EXPECT_EQ(ser::frame_zcr(std::vector<double>(400, 0.3)), 0.0);
  EXPECT_EQ(ser::frame_zcr(std::vector<double>(400, 0.0)), 0.0);
  std::vector<double> alt(400);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
  EXPECT_EQ(ser::frame_zcr(alt), 1.0);
  // Half-sample phase keeps zeros between samples: 2 * 100 Hz * 25 ms = 5 crossings.
  EXPECT_EQ(ser::frame_zcr(sine(100.0, 400, 16000, 1.0, 0.5)), 5.0 / 399.0);
}

TEST(Dct, Orthonormal) {
  for (std::size_t n : {12u, 26u, 40u}) {
    const auto b = ser::dct_matrix(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += b[i * n + k] * b[j * n + k];
        EXPECT_NEAR(acc, i == j ? 1.0 : 0.0, 1e-9);
      }
  }
}

TEST(Mfcc, SilenceIsZero) {
  const auto c = ser::frame_mfcc(std::vector<double>(400, 0.0), ser::FrameConfig{}, 16000);
  for (double v : c) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(Mfcc, MatchesReferenceAndSeparatesTones) {
  const ser::FrameConfig cfg;
  const auto a = sine(1000.0, 400, 16000);
  const auto b = sine(3000.0, 400, 16000);
  const auto ma = ser::frame_mfcc(a, cfg, 16000);
  const auto mb = ser::frame_mfcc(b, cfg, 16000);
  const auto ra = reference_mfcc(a, 16000);
  const auto rb = reference_mfcc(b, 16000);
  double dist = 0.0, ref_dist = 0.0;
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_NEAR(ma[i], ra[i], 1e-6);
    EXPECT_NEAR(mb[i], rb[i], 1e-6);
    dist += (ma[i] - mb[i]) * (ma[i] - mb[i]);
    ref_dist += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  }
  EXPECT_GT(std::sqrt(dist), 1.0);
  EXPECT_GT(std::sqrt(ref_dist), 1.0);
  EXPECT_EQ(ma, ser::frame_mfcc(a, cfg, 16000));
}

TEST(Pitch, SilenceGivesZero) {
  const auto p = ser::frame_pitch(std::vector<double>(400, 0.0), ser::FrameConfig{}, 16000);
  EXPECT_EQ(p.f0, 0.0);
  EXPECT_EQ(p.voicing_prob, 0.0);
}

TEST(Pitch, TwoHundredHzAgreesWithBruteForce) {
  const auto x = sine(200.0, 400, 16000);
  const auto p = ser::frame_pitch(x, ser::FrameConfig{}, 16000);
  EXPECT_NEAR(p.f0, 200.0, 3.0);
  EXPECT_GE(p.voicing_prob, 0.8);

  // Brute-force ACF over every admissible lag.
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= 400.0;
  std::vector<double> w(400);
  for (std::size_t i = 0; i < 400; ++i) w[i] = (x[i] - mean) * (0.54 - 0.46 * std::cos(2.0 * kPi * i / 399.0));
  std::vector<double> r(400, 0.0);
  for (std::size_t lag = 0; lag < 400; ++lag)
    for (std::size_t i = 0; i + lag < 400; ++i) r[lag] += w[i] * w[i + lag];
  const auto best = std::max_element(r.begin() + 32, r.begin() + 320) - r.begin();
  EXPECT_DOUBLE_EQ(p.f0, 16000.0 / static_cast<double>(best));
  EXPECT_NEAR(p.voicing_prob, r[static_cast<std::size_t>(best)] / r[0], 1e-12);
}

TEST(Pitch, WhiteNoiseMostlyUnvoiced) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ser::FrameAnalyzer an(ser::FrameConfig{}, 16000, 400);
  int unvoiced = 0;
  std::vector<double> frame(400);
  for (int trial = 0; trial < 1000; ++trial) {
    for (auto& v : frame) v = u(gen);
    const auto p = an.pitch(frame);
    EXPECT_GE(p.voicing_prob, 0.0);
    EXPECT_LE(p.voicing_prob, 1.0);
    if (p.voicing_prob < 0.55 && p.f0 == 0.0) ++unvoiced;
  }
  EXPECT_GE(unvoiced, 950);
}

TEST(Pitch, VoicingBoundedOnRandomAudio) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> g(0.0, 0.3);
  const ser::FrameAnalyzer an(ser::FrameConfig{}, 16000, 400);
  std::vector<double> frame(400);
  for (int trial = 0; trial < 200; ++trial) {
    const double hz = 60.0 + trial * 2.0;
    for (std::size_t i = 0; i < frame.size(); ++i) frame[i] = std::clamp(0.5 * std::sin(2 * kPi * hz * i / 16000.0) + g(gen), -1.0, 1.0);
    const auto p = an.pitch(frame);
    EXPECT_GE(p.voicing_prob, 0.0);
    EXPECT_LE(p.voicing_prob, 1.0);
    EXPECT_TRUE(p.f0 == 0.0 || (p.f0 >= 50.0 && p.f0 <= 500.0));
  }
}

TEST(Delta, Cases) {
  EXPECT_EQ(ser::delta(std::vector<double>{2, 2, 2, 2}), (std::vector<double>{0, 0, 0, 0}));
  EXPECT_EQ(ser::delta(std::vector<double>{0, 1, 2, 3}), (std::vector<double>{0.5, 1, 1, 0.5}));
  const auto ramp = ser::delta(std::vector<double>{1, 4, 7, 10, 13});
  for (std::size_t i = 1; i + 1 < ramp.size(); ++i) EXPECT_DOUBLE_EQ(ramp[i], 3.0);
}

TEST(Delta, Linear) {
  const std::vector<double> x = {0.3, -1.2, 4.0, 2.5, 0.0, 7.1};
  const std::vector<double> y = {1.0, 2.0, -3.0, 0.5, 0.25, -6.0};
  std::vector<double> mix(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mix[i] = 2.0 * x[i] - 0.5 * y[i];
  const auto dx = ser::delta(x), dy = ser::delta(y), dm = ser::delta(mix);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(dm[i], 2.0 * dx[i] - 0.5 * dy[i], 1e-12);
}

TEST(VoicedSpan, Cases) {
  EXPECT_EQ(ser::voiced_span(std::vector<double>{0, 0, 120, 0, 130, 0}), (std::pair<std::size_t, std::size_t>{2, 4}));
  EXPECT_EQ(ser::voiced_span(std::vector<double>(7, 100.0)), (std::pair<std::size_t, std::size_t>{0, 6}));
  try {
    ser::voiced_span(std::vector<double>(5, 0.0));
    FAIL();
  } catch (const ser::Error& e) {
    EXPECT_EQ(e.code(), ser::ErrorCode::AllUnvoiced);
  }
}

TEST(ExtractLld, SteadyTone) {
  const ser::AudioClip clip(sine(200.0, 16000, 16000), 16000, "tone");
  const auto lld = ser::extract_lld(clip, ser::FrameConfig{});
  EXPECT_EQ(lld.contours.size(), 32u);
  EXPECT_GE(lld.frame_count(), 3u);
  for (const auto& c : lld.contours) EXPECT_EQ(c.size(), lld.frame_count());
  const auto& f0 = lld[ser::contour_index(ser::Descriptor::F0)];
  const auto& df0 = lld[ser::contour_index(ser::Descriptor::F0, true)];
  for (double v : f0) EXPECT_NEAR(v, 200.0, 3.0);
  for (std::size_t t = 1; t + 1 < df0.size(); ++t) EXPECT_NEAR(df0[t], 0.0, 1.0);
  EXPECT_EQ(lld, ser::extract_lld(clip, ser::FrameConfig{}));
}

TEST(ExtractLld, TrimsToVoicedSpan) {
  auto samples = std::vector<double>(3200, 0.0);
  const auto tone = sine(250.0, 8000, 16000, 0.5);
  samples.insert(samples.end(), tone.begin(), tone.end());
  samples.resize(samples.size() + 3200, 0.0);
  const auto lld = ser::extract_lld(ser::AudioClip(samples, 16000), ser::FrameConfig{});
  const auto& f0 = lld[ser::contour_index(ser::Descriptor::F0)];
  EXPECT_GT(f0.front(), 0.0);
  EXPECT_GT(f0.back(), 0.0);
  // The tone covers 48 full frames; partial overlaps at the edges may add a few.
  EXPECT_GE(lld.frame_count(), 45u);
  EXPECT_LE(lld.frame_count(), 55u);
}

TEST(ExtractLld, Rejections) {
  auto code_of = [](const ser::AudioClip& clip) {
    try {
      ser::extract_lld(clip, ser::FrameConfig{});
    } catch (const ser::Error& e) {
      return e.code();
    }
    return ser::ErrorCode::IoError;
  };
  EXPECT_EQ(code_of(ser::AudioClip(std::vector<double>(16000, 0.0), 16000)), ser::ErrorCode::AllUnvoiced);
  EXPECT_EQ(code_of(ser::AudioClip(sine(200.0, 300, 16000), 16000)), ser::ErrorCode::UtteranceTooShort);
  EXPECT_EQ(code_of(ser::AudioClip(sine(200.0, 480, 16000), 16000)), ser::ErrorCode::UtteranceTooShort);
}

TEST(ExtractLld, AmplitudeScaling) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> g(0.0, 0.02);
  auto base = sine(180.0, 12000, 16000, 0.6);
  for (auto& v : base) v += g(gen);
  const ser::FrameConfig cfg;
  const ser::AudioClip a(base, 16000);
  const auto la = ser::extract_lld(a, cfg);
  for (double c : {0.25, 0.5, 0.3}) {
    auto scaled = base;
    for (auto& v : scaled) v *= c;
    const auto lb = ser::extract_lld(ser::AudioClip(scaled, 16000), cfg);
    ASSERT_EQ(la.frame_count(), lb.frame_count());
    const bool exact = c != 0.3;  // powers of two scale without rounding
    for (auto d : {ser::Descriptor::Zcr, ser::Descriptor::VoicingProb, ser::Descriptor::F0}) {
      const auto& x = la[ser::contour_index(d)];
      const auto& y = lb[ser::contour_index(d)];
      for (std::size_t t = 0; t < x.size(); ++t) {
        if (exact) EXPECT_EQ(x[t], y[t]);
        else EXPECT_NEAR(x[t], y[t], 1e-12);
      }
    }
    const auto& ea = la[ser::contour_index(ser::Descriptor::Energy)];
    const auto& eb = lb[ser::contour_index(ser::Descriptor::Energy)];
    for (std::size_t t = 0; t < ea.size(); ++t) EXPECT_NEAR(eb[t], c * ea[t], 1e-9 * c * ea[t]);
  }
}

TEST(Contours, Names) {
  const auto& names = ser::contour_names();
  EXPECT_EQ(names[0], "energy");
  EXPECT_EQ(names[1], "mfcc1");
  EXPECT_EQ(names[12], "mfcc12");
  EXPECT_EQ(names[13], "zcr");
  EXPECT_EQ(names[14], "voiceprob");
  EXPECT_EQ(names[15], "f0");
  EXPECT_EQ(names[16], "d_energy");
  EXPECT_EQ(names[31], "d_f0");
}

}  // namespace
