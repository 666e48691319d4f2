#pragma once

// Chrominance-based pulse extraction.

#include "rppg/pulse.hpp"
#include "rppg/roi_skin.hpp"

namespace rppg {

struct ChromParams {
  double window_s = 1.6;
  BandHz band = kDefaultPulseBand;
  int filter_taps = kDefaultFirTaps;
  RoiStrategy strategy = RoiStrategy::skin;
  double skin_tau = 0.3;

  /// Even window length in frames; throws InvalidArgument below 8.
  std::size_t window_frames(double fps) const;
};

/// Per window: normalize each channel by its window mean, project onto
///   X = 3R - 2G,  Y = 1.5R + G - 1.5B,
/// bandpass both, combine S = Xf - (sd(Xf)/sd(Yf)) Yf, remove the mean and
/// Hann overlap-add. Windows with sd(Yf) numerically zero (below 1e-10 on the
/// unit-mean scale) contribute Xf alone.
PulseSignal chrom_pulse(const RgbTrace& trace, const ChromParams& params);

}  // namespace rppg
