#include "epitome/error.hpp"

namespace epitome {

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kMalformed: return "malformed input";
    case ParseErrorKind::kMissingField: return "missing field";
    case ParseErrorKind::kEmptySketch: return "empty sketch";
    case ParseErrorKind::kShortStroke: return "stroke has fewer than 2 points";
    case ParseErrorKind::kOutOfExtent: return "point outside extent";
    case ParseErrorKind::kNonFinite: return "non-finite coordinate";
    case ParseErrorKind::kUnsupportedCommand: return "unsupported path command";
    case ParseErrorKind::kNoPaths: return "no paths";
    case ParseErrorKind::kMissingDimensions: return "missing dimensions";
  }
  return "unknown parse error";
}

ParseError::ParseError(ParseErrorKind kind, const std::string& detail)
    : DataError(std::string(to_string(kind)) + (detail.empty() ? "" : ": " + detail)),
      kind_(kind) {}

}  // namespace epitome
