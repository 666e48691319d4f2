#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace rppg {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated input file. Carries the byte offset or data row
/// at which parsing failed when one is known.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::optional<std::uint64_t> byte_offset = std::nullopt,
              std::optional<std::size_t> row = std::nullopt);

  std::optional<std::uint64_t> byte_offset() const { return byte_offset_; }
  std::optional<std::size_t> row() const { return row_; }
  /// Message without the location suffix.
  const std::string& detail() const { return detail_; }

  /// Same location, message prefixed with `context: `.
  FormatError with_context(const std::string& context) const;

 private:
  std::string detail_;
  std::optional<std::uint64_t> byte_offset_;
  std::optional<std::size_t> row_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A computation hit a degenerate numeric configuration (zero mean, rank
/// deficient subspace, zero variance, ...).
class NumericDegeneracy : public Error {
 public:
  using Error::Error;
};

class UndefinedCorrelation : public NumericDegeneracy {
 public:
  using NumericDegeneracy::NumericDegeneracy;
};

class DegenerateSubspace : public NumericDegeneracy {
 public:
  using NumericDegeneracy::NumericDegeneracy;
};

class InsufficientPeaks : public Error {
 public:
  using Error::Error;
};

class AggregateUndefined : public Error {
 public:
  using Error::Error;
};

/// A subject id appears on both sides of a train/test protocol.
class SplitOverlap : public Error {
 public:
  using Error::Error;
};

class SearchFailed : public Error {
 public:
  SearchFailed(const std::string& what, std::size_t stage) : Error(what), stage_(stage) {}
  std::size_t stage() const { return stage_; }

 private:
  std::size_t stage_;
};

}  // namespace rppg
