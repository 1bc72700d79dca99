#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace ser {

// Declaration order is also the tie-break order used by every argmax.
enum class EmotionClass : int { Angry = 0, Happy = 1, Neutral = 2, Sad = 3 };

inline constexpr std::size_t kNumClasses = 4;

inline constexpr std::array<EmotionClass, kNumClasses> kAllClasses = {
    EmotionClass::Angry, EmotionClass::Happy, EmotionClass::Neutral, EmotionClass::Sad};

constexpr std::size_t class_index(EmotionClass c) { return static_cast<std::size_t>(c); }

constexpr EmotionClass class_from_index(std::size_t i) { return static_cast<EmotionClass>(i); }

constexpr std::string_view class_name(EmotionClass c) {
  switch (c) {
    case EmotionClass::Angry: return "angry";
    case EmotionClass::Happy: return "happy";
    case EmotionClass::Neutral: return "neutral";
    case EmotionClass::Sad: return "sad";
  }
  return "?";
}

// Capitalised form used in report tables.
constexpr std::string_view class_title(EmotionClass c) {
  switch (c) {
    case EmotionClass::Angry: return "Angry";
    case EmotionClass::Happy: return "Happy";
    case EmotionClass::Neutral: return "Neutral";
    case EmotionClass::Sad: return "Sad";
  }
  return "?";
}

// Case-insensitive.
inline std::optional<EmotionClass> parse_class(std::string_view text) {
  std::string lower(text);
  for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  for (auto c : kAllClasses) {
    if (lower == class_name(c)) return c;
  }
  return std::nullopt;
}

}  // namespace ser
