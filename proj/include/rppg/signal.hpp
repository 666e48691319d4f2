#pragma once

// Shared 1-D signal operations used by every pulse extraction pipeline.

#include <cstddef>
#include <span>
#include <vector>

namespace rppg {

/// A uniformly sampled, finite, non-empty real signal.
class Signal1D {
 public:
  Signal1D(std::vector<double> samples, double fs);

  std::span<const double> samples() const { return samples_; }
  const std::vector<double>& values() const { return samples_; }
  double fs() const { return fs_; }
  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t i) const { return samples_[i]; }
  double duration_s() const { return static_cast<double>(samples_.size()) / fs_; }

 private:
  std::vector<double> samples_;
  double fs_;
};

/// Frequency band in Hz.
struct BandHz {
  double lo = 0.67;
  double hi = 4.0;

  /// Throws InvalidArgument unless 0 < lo < hi < fs/2.
  void validate(double fs) const;
};

inline constexpr BandHz kDefaultPulseBand{0.67, 4.0};
inline constexpr int kDefaultFirTaps = 127;

double mean(std::span<const double> x);
/// Population standard deviation.
double stddev(std::span<const double> x);

/// Centered moving average. Near the edges the window is truncated to the
/// samples that exist, so sample 0 of a width-3 filter averages x[0], x[1].
Signal1D moving_average(const Signal1D& s, std::size_t window_len);

/// Hamming-windowed sinc bandpass, normalized to unit gain at the band
/// center. `num_taps` must be odd so the group delay is an integer.
std::vector<double> design_bandpass_fir(const BandHz& band, double fs, int num_taps);

/// Zero-phase FIR bandpass. The input mean is removed first and the signal
/// is extended by symmetric reflection, so signals shorter than the filter
/// are handled as well.
Signal1D bandpass(const Signal1D& s, const BandHz& band, int num_taps = kDefaultFirTaps);

/// Smoothness-priors detrending: returns (I - (I + lambda^2 D2'D2)^-1) s.
/// Solved for the residual with a banded LDL' factorization in O(T).
Signal1D detrend_smoothness_priors(const Signal1D& s, double lambda);

struct NlmsOptions {
  double mu = 1.0;
  std::size_t order = 1;
  double eps = 1e-8;
};

/// Normalized LMS interference canceller: returns target minus the adaptive
/// estimate of target from the reference tap-delay line.
Signal1D nlms_rectify(const Signal1D& target, const Signal1D& reference,
                      const NlmsOptions& opts = {});

/// Sample Pearson correlation. Throws UndefinedCorrelation when either
/// input has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

double rmse(std::span<const double> a, std::span<const double> b);

/// Periodic Hann window; copies of it shifted by len/2 sum to exactly one.
std::vector<double> hann_window(std::size_t len);

/// Hann-weights each block and accumulates it at its offset into a signal of
/// `total_len` samples. Offsets need not be regularly spaced.
std::vector<double> overlap_add(const std::vector<std::vector<double>>& blocks,
                                std::span<const std::size_t> offsets, std::size_t total_len);

/// Hann overlap-add of equal, even-length blocks at a hop of len/2.
Signal1D hann_overlap_add(const std::vector<std::vector<double>>& blocks, double fs);

}  // namespace rppg
