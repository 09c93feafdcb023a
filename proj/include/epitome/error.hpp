#pragma once

#include <stdexcept>
#include <string>

namespace epitome {

/// Bad input data: malformed files, unreadable paths, constraint violations
/// on user-supplied values. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A check that should hold by construction failed. CLI exit code 3.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class ParseErrorKind {
  kMalformed,
  kMissingField,
  kEmptySketch,
  kShortStroke,
  kOutOfExtent,
  kNonFinite,
  kUnsupportedCommand,
  kNoPaths,
  kMissingDimensions,
};

const char* to_string(ParseErrorKind kind);

class ParseError : public DataError {
 public:
  ParseError(ParseErrorKind kind, const std::string& detail);

  ParseErrorKind kind() const { return kind_; }

 private:
  ParseErrorKind kind_;
};

}  // namespace epitome
