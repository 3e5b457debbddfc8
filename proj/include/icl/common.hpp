#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace icl {

// Error kinds shared across the library. The C API maps these 1:1 onto
// ICL_ERR_* status codes, so values must stay stable.
enum class ErrorKind : int {
  InvalidArgument = 1,
  Io = 2,
  MalformedRecord = 3,
  DuplicateId = 4,
  EmptyDataset = 5,
  MissingPlaceholderValue = 6,
  BackendUnreachable = 7,
  RateLimited = 8,
  ResponseMalformed = 9,
  EmptyInput = 10,
  NoValidRatings = 11,
  DimensionMismatch = 12,
  MissingScore = 13,
  GenerationFailed = 14,
  ScoreMissing = 15,
  EmptyReference = 16,
  LengthMismatch = 17,
  DegenerateHull = 18,
  TooFewExamples = 19,
  TooFewSamples = 20,
  MissingBaseline = 21,
  EmptyRecords = 22,
  InvalidConfig = 23,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

const char* error_kind_name(ErrorKind kind);

// UTF-8 helpers used by prompt rendering and the metrics.
// Decoding is lenient: invalid bytes are passed through as single code points.
std::u32string utf8_decode(const std::string& text);
std::size_t utf8_length(const std::string& text);

// ASCII-only case folding and whitespace handling; non-ASCII bytes untouched.
std::string ascii_lower(const std::string& text);
std::string trim(const std::string& text);
std::string collapse_whitespace(const std::string& text);

}  // namespace icl
