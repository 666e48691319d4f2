#pragma once

// Spatial subspace rotation pulse extraction.

#include <array>
#include <span>
#include <vector>

#include "rppg/media_io.hpp"
#include "rppg/pulse.hpp"
#include "rppg/roi_skin.hpp"

namespace rppg {

/// Eigen-decomposition of a frame's 3x3 RGB correlation matrix, eigenvalues
/// sorted descending and clamped at zero. vectors[i] pairs with values[i].
struct FrameEigen {
  std::array<double, 3> values{};
  std::array<std::array<double, 3>, 3> vectors{};
};

/// Symmetric 3x3 eigen-solver (cyclic Jacobi), row-major input.
FrameEigen eigen_symmetric3(const std::array<double, 9>& c);

/// Flips each eigenvector so its first component with |v| > 1e-12 is positive.
void canonicalize_signs(FrameEigen& e);

/// C = V^T V / N over the pixel rows V (values 0..255). Needs N >= 3.
std::array<double, 9> rgb_correlation(std::span<const Rgb> pixels);

std::array<double, 9> rgb_correlation(std::span<const std::array<double, 3>> rows);

FrameEigen frame_eigen(std::span<const Rgb> pixels);
FrameEigen frame_eigen(std::span<const std::array<double, 3>> rows);

struct SsrParams {
  std::size_t window_l = 0;  ///< frames; 0 means round(fps), rounded to even
  RoiStrategy strategy = RoiStrategy::skin;
  double skin_tau = 0.3;
  double degeneracy_ratio = 1e-12;  ///< lambda2 or lambda3 below this times lambda1 marks a window degenerate

  std::size_t resolved_window(double fps) const;
};

/// Windows whose reference subspace is degenerate are skipped and counted;
/// if every window is skipped DegenerateSubspace is thrown.
PulseSignal ssr_pulse(std::span<const FrameEigen> frames, double fps, const SsrParams& params);

std::vector<FrameEigen> frame_eigens(const FrameSequence& seq, const RoiTrack& roi, const PixelSelection& selection,
                                     double* fallback_fraction = nullptr);

}  // namespace rppg
