#pragma once

// Skin pixel selection and mean-color traces.

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rppg/media_io.hpp"
#include "rppg/signal.hpp"

namespace rppg {

enum class RoiStrategy { bbox, skin, mask };

std::string_view to_string(RoiStrategy s);
std::optional<RoiStrategy> parse_strategy(std::string_view s);

/// Normalized chromaticity r = R/(R+G+B), g = G/(R+G+B). Black maps to gray.
struct Chroma {
  double r = 1.0 / 3.0;
  double g = 1.0 / 3.0;
};

Chroma chromaticity(Rgb p);

/// Gaussian skin-color model in (r, g) chromaticity with a threshold on the
/// peak-normalized likelihood exp(-d^2 / 2).
class SkinModel {
 public:
  /// `cov` is row-major 2x2 and must be symmetric positive definite.
  SkinModel(Chroma mean, std::array<double, 4> cov, double tau, bool regularized = false);

  Chroma mean() const { return mean_; }
  const std::array<double, 4>& covariance() const { return cov_; }
  double tau() const { return tau_; }
  bool regularized() const { return regularized_; }

  double mahalanobis_sq(Chroma c) const;
  double likelihood(Chroma c) const;
  bool is_skin(Rgb p) const { return likelihood(chromaticity(p)) >= tau_; }
  SkinModel with_tau(double tau) const;

 private:
  Chroma mean_;
  std::array<double, 4> cov_;
  std::array<double, 4> inv_;
  double tau_;
  bool regularized_;
};

inline constexpr double kSkinRegularization = 1e-6;

/// Fits the model on the central sub-rectangle (half width, half height) of
/// `roi`. A degenerate covariance gets 1e-6 * I added and is flagged.
SkinModel fit_skin_model(const FrameView& frame, const Box& roi, double tau);

/// Boolean mask over `region`.
struct PixelMask {
  Box region;
  std::vector<std::uint8_t> bits;

  bool contains(int x, int y) const;
  std::size_t count() const;
};

/// Skin classification of every pixel in `region` (whole frame when unset).
PixelMask skin_mask(const FrameView& frame, const SkinModel& model, std::optional<Box> region = std::nullopt);

/// Pixels whose centers lie inside or on the landmark polygon (even-odd
/// rule). Throws InvalidArgument for fewer than 4 points or a
/// self-intersecting outline.
PixelMask lower_face_mask(std::span<const PointF> landmarks, std::optional<FrameGeometry> clip = std::nullopt);

struct PixelSelection {
  RoiStrategy strategy = RoiStrategy::bbox;
  double tau = 0.3;
  /// Fixed skin model. When unset the model is refit on every frame's seed
  /// patch.
  std::optional<SkinModel> model;
};

struct FramePixels {
  std::vector<Rgb> pixels;
  bool fallback = false;  ///< skin mask was empty, full ROI used instead
};

FramePixels select_pixels(const FrameView& frame, const RoiEntry& roi, const PixelSelection& selection);

struct RgbTrace {
  std::vector<double> r, g, b;
  std::vector<std::size_t> counts;
  double fs = 0.0;
  std::vector<std::size_t> fallback_frames;

  std::size_t size() const { return r.size(); }
  /// 0 = red, 1 = green, 2 = blue.
  Signal1D channel(int c) const;
  double fallback_fraction() const {
    return r.empty() ? 0.0 : static_cast<double>(fallback_frames.size()) / static_cast<double>(r.size());
  }
};

RgbTrace mean_rgb_trace(const FrameSequence& seq, const RoiTrack& roi, const PixelSelection& selection);

/// Clips `b` to the frame; throws InvalidArgument when nothing remains.
Box clip_to_frame(const Box& b, int width, int height);

}  // namespace rppg
