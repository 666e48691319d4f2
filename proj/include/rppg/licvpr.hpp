#pragma once

// Illumination-rectified pulse extraction with motion segment elimination.

#include <cstddef>
#include <vector>

#include "rppg/media_io.hpp"
#include "rppg/pulse.hpp"
#include "rppg/roi_skin.hpp"

namespace rppg {

struct LiParams {
  NlmsOptions nlms;
  bool rectify = true;
  bool eliminate_motion = true;
  double segment_s = 1.0;
  double discard_percentile = 95.0;
  double detrend_lambda = 300.0;
  std::size_t ma_window = 3;
  BandHz band = kDefaultPulseBand;
  int filter_taps = kDefaultFirTaps;
  int background_margin = 8;  ///< pixels added around the face box before taking the background
  RoiStrategy strategy = RoiStrategy::mask;
  double skin_tau = 0.3;

  void validate() const;
};

/// Per-frame mean green over every pixel outside the face box grown by
/// `margin`. Throws InvalidArgument if no pixel remains.
Signal1D background_trace(const FrameSequence& seq, const RoiTrack& face, int margin);

struct MotionElimination {
  Signal1D signal;
  std::vector<std::size_t> discarded_segments;
  std::vector<std::size_t> kept_samples;  ///< original index of every output sample
  std::size_t segment_len = 0;
};

/// Linear-interpolation percentile, p in [0, 100].
double percentile(std::vector<double> values, double p);

/// Splits into segments of segment_s seconds (last one may be short), drops
/// those whose SD exceeds the p-th percentile of all segment SDs and
/// concatenates the rest. Where a gap was closed, the next segment is
/// shifted so its head mean (about one second) matches the tail mean of
/// what precedes it.
MotionElimination eliminate_motion_segments(const Signal1D& s, double segment_s, double p);

PulseSignal licvpr_pulse(const Signal1D& face_green, const Signal1D& background, const LiParams& params);

}  // namespace rppg
