#pragma once

// Heart-rate estimation from pulse or reference signals.

#include <cstddef>
#include <span>
#include <vector>

#include "rppg/signal.hpp"

namespace rppg {

enum class HrMethod { spectral, peaks };

struct HrEstimate {
  double bpm = 0.0;
  HrMethod method = HrMethod::spectral;
  BandHz band = kDefaultPulseBand;
  double resolution_bpm = 0.0;  ///< bin spacing for spectral, 0 for peaks
  bool low_confidence = false;  ///< in-band peak power below twice the in-band median
};

/// FFT length: next power of two >= max(nfft_min, 8 * n).
std::size_t spectral_nfft(std::size_t n, std::size_t nfft_min = 0);

/// |FFT|^2 of the zero-padded signal, bins 0..nfft/2.
std::vector<double> periodogram(std::span<const double> x, std::size_t nfft);

/// Argmax of the periodogram within the band, the band's upper edge clamped
/// to Nyquist. Requires at least 2 s of signal.
HrEstimate estimate_hr_spectral(const Signal1D& s, const BandHz& band = kDefaultPulseBand, std::size_t nfft_min = 0);

/// Local maxima with prominence >= min_prominence_sd * SD(s), thinned
/// greedily by height so that no two are closer than min_dist_s.
std::vector<std::size_t> detect_peaks(const Signal1D& s, double min_dist_s = 0.3, double min_prominence_sd = 0.5);

/// 60 * (count - 1) * fs / (last - first). Throws InsufficientPeaks below 2.
HrEstimate hr_from_peaks(std::span<const std::size_t> peaks, double fs);

}  // namespace rppg
