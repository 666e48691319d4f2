#include "rppg/pulse.hpp"

#include <cmath>

#include "rppg/errors.hpp"

namespace rppg {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::chrom: return "chrom";
    case Algorithm::licvpr: return "licvpr";
    case Algorithm::ssr: return "ssr";
  }
  return "chrom";
}

std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "chrom") return Algorithm::chrom;
  if (s == "licvpr") return Algorithm::licvpr;
  if (s == "ssr" || s == "2sr") return Algorithm::ssr;
  return std::nullopt;
}

std::vector<std::size_t> analysis_window_starts(std::size_t n, std::size_t len) {
  if (len < 2 || len % 2 != 0) throw InvalidArgument("window length must be even and at least 2");
  if (len > n) throw InvalidArgument("window longer than the signal");
  const std::size_t hop = len / 2;
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + len <= n; s += hop) starts.push_back(s);
  if (starts.back() + len < n) starts.push_back(n - len);
  return starts;
}

std::size_t even_frame_count(double seconds, double fps) {
  if (!(seconds > 0.0) || !(fps > 0.0)) throw InvalidArgument("window duration and frame rate must be positive");
  const auto half = std::llround(seconds * fps / 2.0);
  return static_cast<std::size_t>(std::max<long long>(1, half)) * 2;
}

}  // namespace rppg
