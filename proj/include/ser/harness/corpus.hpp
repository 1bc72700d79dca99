#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ser/audio.hpp"
#include "ser/emotion.hpp"
#include "ser/error.hpp"

namespace ser {

struct CorpusEntry {
  std::filesystem::path path;
  std::string id;  // path relative to the corpus root, without extension
  EmotionClass label;
};

// Result of scanning a corpus directory. Skipped files are reported, not fatal.
struct CorpusListing {
  std::vector<CorpusEntry> entries;
  std::map<char, std::size_t> skipped_codes;  // EMO-DB emotion codes outside the four classes
  std::vector<std::string> unrecognized;      // files or directories that could not be labelled

  std::array<std::size_t, kNumClasses> class_counts() const {
    std::array<std::size_t, kNumClasses> counts{};
    for (const auto& e : entries) ++counts[class_index(e.label)];
    return counts;
  }
};

struct LabeledClip {
  AudioClip clip;
  EmotionClass label;
  std::string id;
};

namespace detail {

inline bool has_wav_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".wav";
}

inline std::string corpus_id(const std::filesystem::path& root, const std::filesystem::path& file) {
  auto rel = std::filesystem::relative(file, root);
  rel.replace_extension();
  return rel.generic_string();
}

inline std::vector<std::filesystem::path> sorted_wavs(const std::filesystem::path& dir, bool recursive) {
  std::vector<std::filesystem::path> files;
  if (recursive) {
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
      if (e.is_regular_file() && has_wav_extension(e.path())) files.push_back(e.path());
  } else {
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.is_regular_file() && has_wav_extension(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline void require_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::IoError, "not a directory: " + dir.string());
}

}  // namespace detail

// EMO-DB names files `SSTTTEV` (speaker, text, emotion code, version), e.g.
// 03a01Wa.wav. Codes: W anger, L boredom, E disgust, A fear, F happiness,
// T sadness, N neutral.
inline std::optional<char> emodb_emotion_code(const std::string& stem) {
  if (stem.size() != 7) return std::nullopt;
  const auto u = [&](std::size_t i) { return static_cast<unsigned char>(stem[i]); };
  if (!std::isdigit(u(0)) || !std::isdigit(u(1)) || !std::islower(u(2)) || !std::isdigit(u(3)) ||
      !std::isdigit(u(4)) || !std::isupper(u(5)) || !std::islower(u(6)))
    return std::nullopt;
  static const std::string codes = "WLEAFTN";
  if (codes.find(stem[5]) == std::string::npos) return std::nullopt;
  return stem[5];
}

inline std::optional<EmotionClass> emodb_class(char code) {
  switch (code) {
    case 'W': return EmotionClass::Angry;
    case 'F': return EmotionClass::Happy;
    case 'N': return EmotionClass::Neutral;
    case 'T': return EmotionClass::Sad;
    default: return std::nullopt;
  }
}

inline CorpusListing scan_berlin(const std::filesystem::path& dir) {
  detail::require_directory(dir);
  CorpusListing listing;
  for (const auto& file : detail::sorted_wavs(dir, false)) {
    const auto code = emodb_emotion_code(file.stem().string());
    if (!code) {
      listing.unrecognized.push_back(file.filename().string());
      continue;
    }
    if (const auto label = emodb_class(*code)) {
      listing.entries.push_back({file, detail::corpus_id(dir, file), *label});
    } else {
      ++listing.skipped_codes[*code];
    }
  }
  if (listing.entries.empty()) throw Error(ErrorCode::EmptyDataset, "no usable EMO-DB files in " + dir.string());
  return listing;
}

// One subdirectory per class (angry/happy/neutral/sad, any case); WAVs are
// collected recursively below each.
inline CorpusListing scan_generic(const std::filesystem::path& dir) {
  detail::require_directory(dir);
  CorpusListing listing;
  std::vector<std::filesystem::path> subdirs;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_directory()) subdirs.push_back(e.path());
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& sub : subdirs) {
    const auto label = parse_class(sub.filename().string());
    if (!label) {
      listing.unrecognized.push_back(sub.filename().string() + "/");
      continue;
    }
    for (const auto& file : detail::sorted_wavs(sub, true))
      listing.entries.push_back({file, detail::corpus_id(dir, file), *label});
  }
  if (listing.entries.empty()) throw Error(ErrorCode::EmptyDataset, "no labelled WAV files under " + dir.string());
  return listing;
}

inline std::vector<LabeledClip> load_listing(const CorpusListing& listing) {
  std::vector<LabeledClip> clips;
  clips.reserve(listing.entries.size());
  for (const auto& e : listing.entries) clips.push_back({load_wav(e.path), e.label, e.id});
  return clips;
}

inline std::vector<LabeledClip> load_berlin(const std::filesystem::path& dir) { return load_listing(scan_berlin(dir)); }

inline std::vector<LabeledClip> load_generic(const std::filesystem::path& dir) {
  return load_listing(scan_generic(dir));
}

}  // namespace ser
