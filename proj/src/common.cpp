#include "icl/common.hpp"

#include <cctype>

namespace icl {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::MissingPlaceholderValue: return "MissingPlaceholderValue";
    case ErrorKind::BackendUnreachable: return "BackendUnreachable";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::ResponseMalformed: return "ResponseMalformed";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NoValidRatings: return "NoValidRatings";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::MissingScore: return "MissingScore";
    case ErrorKind::GenerationFailed: return "GenerationFailed";
    case ErrorKind::ScoreMissing: return "ScoreMissing";
    case ErrorKind::EmptyReference: return "EmptyReference";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegenerateHull: return "DegenerateHull";
    case ErrorKind::TooFewExamples: return "TooFewExamples";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::MissingBaseline: return "MissingBaseline";
    case ErrorKind::EmptyRecords: return "EmptyRecords";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

std::u32string utf8_decode(const std::string& text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    char32_t cp = c;
    std::size_t extra = 0;
    if (c >= 0xF0) {
      cp = c & 0x07u;
      extra = 3;
    } else if (c >= 0xE0) {
      cp = c & 0x0Fu;
      extra = 2;
    } else if (c >= 0xC0) {
      cp = c & 0x1Fu;
      extra = 1;
    }
    if (extra > 0 && i + extra < n) {
      bool ok = true;
      for (std::size_t j = 1; j <= extra; ++j) {
        const unsigned char cc = static_cast<unsigned char>(text[i + j]);
        if ((cc & 0xC0u) != 0x80u) {
          ok = false;
          break;
        }
        cp = (cp << 6) | (cc & 0x3Fu);
      }
      if (ok) {
        out.push_back(cp);
        i += extra + 1;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

std::size_t utf8_length(const std::string& text) {
  return utf8_decode(text).size();
}

std::string ascii_lower(const std::string& text) {
  std::string out = text;
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

std::string collapse_whitespace(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_run = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_run = true;
      continue;
    }
    if (in_run && !out.empty()) out.push_back(' ');
    in_run = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace icl
