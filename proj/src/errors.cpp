#include "rppg/errors.hpp"

namespace rppg {

namespace {

std::string decorate(const std::string& what, std::optional<std::uint64_t> offset,
                     std::optional<std::size_t> row) {
  std::string out = what;
  if (offset) out += " (at byte offset " + std::to_string(*offset) + ")";
  if (row) out += " (at row " + std::to_string(*row) + ")";
  return out;
}

}  // namespace

FormatError::FormatError(const std::string& what, std::optional<std::uint64_t> byte_offset,
                         std::optional<std::size_t> row)
    : Error(decorate(what, byte_offset, row)), detail_(what), byte_offset_(byte_offset), row_(row) {}

FormatError FormatError::with_context(const std::string& context) const {
  return FormatError(context + ": " + detail_, byte_offset_, row_);
}

}  // namespace rppg
