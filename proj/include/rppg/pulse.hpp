#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "rppg/signal.hpp"

namespace rppg {

enum class Algorithm { chrom, licvpr, ssr };

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view s);

/// Extracted pulse waveform plus bookkeeping from the pipeline that made it.
struct PulseSignal {
  Signal1D signal;
  Algorithm source = Algorithm::chrom;
  double fallback_fraction = 0.0;   ///< frames whose skin mask fell back to the full ROI
  double discarded_fraction = 0.0;  ///< samples removed by motion elimination
  std::size_t skipped_windows = 0;  ///< windows dropped as degenerate
};

/// Start indices of analysis windows of `len` samples at a hop of len/2
/// over `n` samples. If the regular grid leaves a tail uncovered, one more
/// window anchored at n - len is appended.
std::vector<std::size_t> analysis_window_starts(std::size_t n, std::size_t len);

/// Rounds a duration in frames to the nearest even count (minimum 2).
std::size_t even_frame_count(double seconds, double fps);

}  // namespace rppg
