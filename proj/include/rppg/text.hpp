#pragma once

// Small text helpers shared by the CSV readers and writers.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rppg {

/// Shortest decimal representation that round-trips to the same double.
std::string format_number(double v);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

std::string_view trim(std::string_view s);

/// Strict parses: the whole (trimmed) field must be consumed.
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_integer(std::string_view field);

}  // namespace rppg
