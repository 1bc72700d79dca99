#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ser {

enum class ErrorCode {
  NotWav,
  UnsupportedEncoding,
  EmptyAudio,
  IoError,
  TooShort,
  UtteranceTooShort,
  AllUnvoiced,
  ContourTooShort,
  InvalidConfig,
  LengthMismatch,
  InvalidDataset,
  TooFewRows,
  KTooLarge,
  DegeneratePair,
  WrongArity,
  FeatureMismatch,
  EmptyDataset,
  EmptyTestSet,
  SchemaMismatch,
  MalformedRow,
  MalformedFile,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotWav: return "NotWav";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::EmptyAudio: return "EmptyAudio";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::UtteranceTooShort: return "UtteranceTooShort";
    case ErrorCode::AllUnvoiced: return "AllUnvoiced";
    case ErrorCode::ContourTooShort: return "ContourTooShort";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidDataset: return "InvalidDataset";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::WrongArity: return "WrongArity";
    case ErrorCode::FeatureMismatch: return "FeatureMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::MalformedFile: return "MalformedFile";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised for a malformed CSV row; `row()` is the 1-based data row (header excluded).
class MalformedRowError : public Error {
 public:
  MalformedRowError(std::size_t row, const std::string& what)
      : Error(ErrorCode::MalformedRow, "row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace ser
