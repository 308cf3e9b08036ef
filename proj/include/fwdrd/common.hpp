#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace fwdrd {

using BlockId = std::uint64_t;

/// Distance in accesses between two references to the same block.
/// `kInfinite` marks "no such reference".
using Distance = std::uint64_t;
inline constexpr Distance kInfinite = std::numeric_limits<Distance>::max();

inline constexpr bool is_finite(Distance d) noexcept { return d != kInfinite; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Binary container problems: bad magic, unsupported version, checksum mismatch, truncation.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace fwdrd

namespace fwdrd {

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fwdrd
