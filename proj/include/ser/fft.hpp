#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "ser/error.hpp"

namespace ser {

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

constexpr std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 decimation-in-time FFT.
inline void fft_inplace(std::span<std::complex<double>> x) {
  const std::size_t n = x.size();
  if (!is_power_of_two(n)) throw Error(ErrorCode::InvalidConfig, "FFT size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  std::vector<std::complex<double>> twiddle(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k)
    twiddle[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> w = twiddle[k * stride];
        const auto u = x[i + k];
        const auto v = x[i + k + half] * w;
        x[i + k] = u + v;
        x[i + k + half] = u - v;
      }
    }
  }
}

// |X_k| for k = 0 .. fft_size/2 of a real signal zero-padded to fft_size.
inline std::vector<double> magnitude_spectrum(std::span<const double> signal, std::size_t fft_size) {
  if (signal.size() > fft_size)
    throw Error(ErrorCode::InvalidConfig, "signal longer than FFT size");
  std::vector<std::complex<double>> buf(fft_size);
  for (std::size_t i = 0; i < signal.size(); ++i) buf[i] = signal[i];
  fft_inplace(buf);
  std::vector<double> mag(fft_size / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

}  // namespace ser
