#pragma once

// Minimal RIFF writer for tests, kept separate from the library encoder.

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace testwav {

inline void u16(std::string& s, std::uint16_t v) {
  s += static_cast<char>(v & 0xff);
  s += static_cast<char>(v >> 8);
}

inline void u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s += static_cast<char>((v >> (8 * i)) & 0xff);
}

inline std::string riff(std::uint16_t format, std::uint16_t channels, std::uint32_t rate, std::uint16_t bits,
                        const std::string& payload, bool junk_chunk) {
  std::string fmt;
  u16(fmt, format);
  u16(fmt, channels);
  u32(fmt, rate);
  u32(fmt, rate * channels * bits / 8);
  u16(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  u16(fmt, bits);
  std::string body = "WAVE";
  if (junk_chunk) {
    body += "LIST";
    u32(body, 5);
    body += "abcde";
    body += '\0';  // pad byte for the odd-sized chunk
  }
  body += "fmt ";
  u32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  body += "data";
  u32(body, static_cast<std::uint32_t>(payload.size()));
  body += payload;
  std::string out = "RIFF";
  u32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

// Channels are given as separate sample vectors of equal length.
inline std::string pcm16(const std::vector<std::vector<std::int16_t>>& channels, std::uint32_t rate,
                         bool junk_chunk = false) {
  std::string payload;
  const std::size_t n = channels.front().size();
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& ch : channels) u16(payload, static_cast<std::uint16_t>(ch[i]));
  return riff(1, static_cast<std::uint16_t>(channels.size()), rate, 16, payload, junk_chunk);
}

inline std::string float32(const std::vector<float>& mono, std::uint32_t rate) {
  std::string payload;
  for (float f : mono) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    u32(payload, bits);
  }
  return riff(3, 1, rate, 32, payload, false);
}

// Patches the format tag and bit depth of a file produced above.
inline std::string with_format(std::string wav, std::uint16_t format, std::uint16_t bits) {
  const auto pos = wav.find("fmt ") + 8;
  wav[pos] = static_cast<char>(format & 0xff);
  wav[pos + 1] = static_cast<char>(format >> 8);
  wav[pos + 14] = static_cast<char>(bits & 0xff);
  wav[pos + 15] = static_cast<char>(bits >> 8);
  return wav;
}

}  // namespace testwav
