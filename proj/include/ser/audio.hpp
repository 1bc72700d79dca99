#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ser/detail/text.hpp"
#include "ser/error.hpp"

namespace ser {

inline constexpr int kMinSampleRateHz = 8000;

// Mono PCM audio normalised to [-1, 1]. Immutable once constructed.
class AudioClip {
 public:
  AudioClip(std::vector<double> samples, int sample_rate_hz, std::string source_id = {})
      : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz), source_id_(std::move(source_id)) {
    if (samples_.empty()) throw Error(ErrorCode::EmptyAudio, "clip has no samples");
    if (sample_rate_hz_ < kMinSampleRateHz)
      throw Error(ErrorCode::UnsupportedEncoding,
                  "sample rate " + std::to_string(sample_rate_hz_) + " Hz is below 8000 Hz");
    for (double s : samples_) {
      if (!(std::abs(s) <= 1.0))
        throw Error(ErrorCode::UnsupportedEncoding, "sample outside [-1, 1] or not finite");
    }
  }

  const std::vector<double>& samples() const noexcept { return samples_; }
  int sample_rate_hz() const noexcept { return sample_rate_hz_; }
  const std::string& source_id() const noexcept { return source_id_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration_seconds() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_hz_;
  }

 private:
  std::vector<double> samples_;
  int sample_rate_hz_;
  std::string source_id_;
};

namespace detail {

inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

}  // namespace detail

// Decodes an in-memory RIFF/WAVE image. Accepts 16-bit PCM and 32-bit IEEE
// float, mono or stereo; stereo is averaged to mono.
inline AudioClip decode_wav(std::string_view bytes, std::string source_id = {}) {
  using detail::read_u16;
  using detail::read_u32;
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::NotWav, "missing RIFF/WAVE magic in '" + source_id + "'");

  struct Format {
    std::uint16_t tag = 0;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
  };
  std::optional<Format> fmt;
  std::optional<std::pair<std::size_t, std::size_t>> payload;  // offset, length

  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const std::uint32_t chunk_size = read_u32(data + pos + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = size - body;
    if (std::memcmp(data + pos, "fmt ", 4) == 0) {
      if (chunk_size < 16 || chunk_size > available)
        throw Error(ErrorCode::NotWav, "truncated fmt chunk");
      Format f;
      f.tag = read_u16(data + body);
      f.channels = read_u16(data + body + 2);
      f.rate = read_u32(data + body + 4);
      f.bits = read_u16(data + body + 14);
      if (f.tag == detail::kFormatExtensible) {
        if (chunk_size < 40) throw Error(ErrorCode::NotWav, "truncated extensible fmt chunk");
        // The first two bytes of the sub-format GUID carry the real format tag.
        f.tag = read_u16(data + body + 24);
      }
      fmt = f;
    } else if (std::memcmp(data + pos, "data", 4) == 0) {
      // Some writers leave the data size at 0 or 0xffffffff when streaming.
      const std::size_t len = std::min<std::size_t>(chunk_size, available);
      payload = std::make_pair(body, len);
    }
    if (chunk_size > available) break;
    pos = body + chunk_size + (chunk_size & 1u);
  }

  if (!fmt) throw Error(ErrorCode::NotWav, "no fmt chunk");
  if (!payload) throw Error(ErrorCode::NotWav, "no data chunk");

  const bool pcm16 = fmt->tag == detail::kFormatPcm && fmt->bits == 16;
  const bool float32 = fmt->tag == detail::kFormatFloat && fmt->bits == 32;
  if (!pcm16 && !float32)
    throw Error(ErrorCode::UnsupportedEncoding,
                "format tag " + std::to_string(fmt->tag) + " with " + std::to_string(fmt->bits) +
                    " bits per sample");
  if (fmt->channels != 1 && fmt->channels != 2)
    throw Error(ErrorCode::UnsupportedEncoding, std::to_string(fmt->channels) + " channels");

  const std::size_t bytes_per_sample = fmt->bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt->channels;
  const std::size_t frames = payload->second / frame_bytes;
  if (frames == 0) throw Error(ErrorCode::EmptyAudio, "data chunk holds no samples");

  std::vector<double> samples(frames);
  const unsigned char* p = data + payload->first;
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t ch = 0; ch < fmt->channels; ++ch) {
      const unsigned char* s = p + i * frame_bytes + ch * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<std::int16_t>(read_u16(s)) / 32768.0;
      } else {
        float f;
        const std::uint32_t bits = read_u32(s);
        std::memcpy(&f, &bits, sizeof(f));
        acc += std::isfinite(f) ? std::clamp(static_cast<double>(f), -1.0, 1.0) : 0.0;
      }
    }
    samples[i] = acc / fmt->channels;
  }
  return AudioClip(std::move(samples), static_cast<int>(fmt->rate), std::move(source_id));
}

inline AudioClip load_wav(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path))
    throw Error(ErrorCode::IoError, "no such file: " + path.string());
  return decode_wav(detail::read_file(path.string()), path.stem().string());
}

// 16-bit PCM mono encoding; samples are scaled by 32768 and clamped.
inline std::string encode_wav16(const AudioClip& clip) {
  using detail::put_u16;
  using detail::put_u32;
  const auto n = static_cast<std::uint32_t>(clip.size());
  const std::uint32_t data_bytes = n * 2;
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, detail::kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz()));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz()) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double s : clip.samples()) {
    const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  return out;
}

inline void write_wav16(const std::filesystem::path& path, const AudioClip& clip) {
  detail::write_file(path.string(), encode_wav16(clip));
}

}  // namespace ser
