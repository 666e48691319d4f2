#pragma once

// Synthetic face-like sequences with a known heart rate.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rppg/media_io.hpp"

namespace rppg {

struct SynthConfig {
  int width = 96;
  int height = 72;
  Rational fps{20, 1};
  double duration_s = 60.0;
  double hr_bpm = 72.0;
  /// Peak modulation depth per channel (r, g, b) in 8-bit levels.
  std::array<double, 3> pulse_amplitude{0.5, 1.0, 0.5};
  std::array<double, 3> skin_base_rgb{180.0, 120.0, 100.0};
  double background_gray = 128.0;
  double noise_sd = 0.0;
  /// Static triangular dither in (-1, 1) added before rounding so that
  /// spatial means are not quantized to whole levels. Off gives spatially uniform skin.
  bool ordered_dither = true;
  /// Additive sinusoidal illumination drift on skin and background alike.
  double drift_hz = 0.0;
  double drift_amplitude = 0.0;
  /// Unset means a centered rectangle of half the frame size.
  std::optional<Box> skin_rect;
  /// Face box = skin_rect grown by this many pixels per side, clipped.
  int face_margin = 8;
  double bvp_fs = 256.0;
  double bvp_noise_sd = 0.0;
  std::uint64_t seed = 0;
  std::string sequence_id = "seq";
  std::string subject_id = "synthetic";
  Lighting lighting = Lighting::studio;

  Box resolved_skin_rect() const;
  std::size_t frame_count() const;
  /// Throws InvalidArgument on an unusable configuration.
  void validate() const;
};

struct SynthBundle {
  FrameSequence video;
  PhysioSignal bvp;
  RoiTrack face;       ///< one box row at frame 0 (inherited by later frames)
  RoiTrack landmarks;  ///< skin_rect corners as a 4-point polygon
  double hr_bpm;
};

/// Skin:       base + a*sin(2 pi f t) + drift + noise
/// Background: gray + drift + noise
/// Pixel values are (optionally dithered,) rounded and clamped to [0, 255];
/// more than 1% clipped samples is rejected. The BVP is the same unit
/// sinusoid sampled at bvp_fs.
SynthBundle generate(const SynthConfig& config);

/// Exact times (s) of the BVP maxima within the sequence duration.
std::vector<double> beat_times(const SynthConfig& config);

/// File names of a sequence bundle inside its directory.
struct BundlePaths {
  std::filesystem::path video, face_roi, landmarks, bvp_csv, bvp_meta, truth;
  static BundlePaths in(const std::filesystem::path& dir);
};

/// Writes seq.rvid, roi.csv, landmarks.csv, bvp.csv, bvp.json and hr.json.
void write_bundle(const SynthBundle& bundle, const std::filesystem::path& dir);

double read_truth_hr(const std::filesystem::path& path);

/// `count` variants of `base` with HR drawn uniformly from [hr_min, hr_max],
/// ids s00, s01, ..., one subject and one seed per sequence.
std::vector<SynthConfig> dataset_configs(const SynthConfig& base, std::size_t count, double hr_min, double hr_max,
                                         std::uint64_t seed);

/// The first `train_count` configs form the train split, the rest the test split.
ProtocolIndex dataset_protocol(const std::vector<SynthConfig>& configs, std::size_t train_count, std::string name);

}  // namespace rppg
