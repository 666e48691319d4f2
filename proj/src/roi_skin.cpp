#include "rppg/roi_skin.hpp"

#include <algorithm>
#include <cmath>

#include "rppg/errors.hpp"

namespace rppg {

std::string_view to_string(RoiStrategy s) {
  switch (s) {
    case RoiStrategy::bbox: return "bbox";
    case RoiStrategy::skin: return "skin";
    case RoiStrategy::mask: return "mask";
  }
  return "bbox";
}

std::optional<RoiStrategy> parse_strategy(std::string_view s) {
  if (s == "bbox") return RoiStrategy::bbox;
  if (s == "skin") return RoiStrategy::skin;
  if (s == "mask") return RoiStrategy::mask;
  return std::nullopt;
}

Chroma chromaticity(Rgb p) {
  const int sum = p.r + p.g + p.b;
  if (sum == 0) return {};
  return {static_cast<double>(p.r) / sum, static_cast<double>(p.g) / sum};
}

SkinModel::SkinModel(Chroma mean, std::array<double, 4> cov, double tau, bool regularized)
    : mean_(mean), cov_(cov), tau_(tau), regularized_(regularized) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("skin threshold must lie in (0, 1)");
  if (cov[1] != cov[2]) throw InvalidArgument("skin covariance must be symmetric");
  const double det = cov[0] * cov[3] - cov[1] * cov[2];
  if (!(cov[0] > 0.0) || !(det > 0.0)) throw InvalidArgument("skin covariance must be positive definite");
  inv_ = {cov[3] / det, -cov[1] / det, -cov[2] / det, cov[0] / det};
}

double SkinModel::mahalanobis_sq(Chroma c) const {
  const double dr = c.r - mean_.r;
  const double dg = c.g - mean_.g;
  return dr * (inv_[0] * dr + inv_[1] * dg) + dg * (inv_[2] * dr + inv_[3] * dg);
}

double SkinModel::likelihood(Chroma c) const { return std::exp(-0.5 * mahalanobis_sq(c)); }

SkinModel SkinModel::with_tau(double tau) const { return SkinModel(mean_, cov_, tau, regularized_); }

Box clip_to_frame(const Box& b, int width, int height) {
  const int x0 = std::clamp(b.x, 0, width);
  const int y0 = std::clamp(b.y, 0, height);
  const int x1 = std::clamp(b.x + b.w, 0, width);
  const int y1 = std::clamp(b.y + b.h, 0, height);
  if (x1 <= x0 || y1 <= y0) throw InvalidArgument("ROI is empty after clipping to the frame");
  return Box{x0, y0, x1 - x0, y1 - y0};
}

SkinModel fit_skin_model(const FrameView& frame, const Box& roi, double tau) {
  const Box box = clip_to_frame(roi, frame.width, frame.height);
  if (box.area() < 100) throw InvalidArgument("skin model needs an ROI of at least 100 pixels");

  const int sw = std::max(1, box.w / 2);
  const int sh = std::max(1, box.h / 2);
  const int sx = box.x + (box.w - sw) / 2;
  const int sy = box.y + (box.h - sh) / 2;

  double mr = 0.0, mg = 0.0;
  std::vector<Chroma> seed;
  seed.reserve(static_cast<std::size_t>(sw) * static_cast<std::size_t>(sh));
  for (int y = sy; y < sy + sh; ++y) {
    for (int x = sx; x < sx + sw; ++x) {
      const Chroma c = chromaticity(frame.at(x, y));
      seed.push_back(c);
      mr += c.r;
      mg += c.g;
    }
  }
  const auto n = static_cast<double>(seed.size());
  mr /= n;
  mg /= n;
  double srr = 0.0, srg = 0.0, sgg = 0.0;
  for (const auto& c : seed) {
    srr += (c.r - mr) * (c.r - mr);
    srg += (c.r - mr) * (c.g - mg);
    sgg += (c.g - mg) * (c.g - mg);
  }
  std::array<double, 4> cov{srr / n, srg / n, srg / n, sgg / n};

  // Smallest eigenvalue of the 2x2 covariance.
  const double half_trace = 0.5 * (cov[0] + cov[3]);
  const double det = cov[0] * cov[3] - cov[1] * cov[1];
  const double min_eig = half_trace - std::sqrt(std::max(0.0, half_trace * half_trace - det));
  bool regularized = false;
  if (min_eig < 1e-10) {
    cov[0] += kSkinRegularization;
    cov[3] += kSkinRegularization;
    regularized = true;
  }
  return SkinModel({mr, mg}, cov, tau, regularized);
}

bool PixelMask::contains(int x, int y) const {
  if (x < region.x || y < region.y || x >= region.x + region.w || y >= region.y + region.h) return false;
  return bits[static_cast<std::size_t>(y - region.y) * static_cast<std::size_t>(region.w) +
              static_cast<std::size_t>(x - region.x)] != 0;
}

std::size_t PixelMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

PixelMask skin_mask(const FrameView& frame, const SkinModel& model, std::optional<Box> region) {
  const Box box = region ? clip_to_frame(*region, frame.width, frame.height) : Box{0, 0, frame.width, frame.height};
  PixelMask mask{box, std::vector<std::uint8_t>(static_cast<std::size_t>(box.area()), 0)};
  std::size_t i = 0;
  for (int y = box.y; y < box.y + box.h; ++y)
    for (int x = box.x; x < box.x + box.w; ++x) mask.bits[i++] = model.is_skin(frame.at(x, y)) ? 1 : 0;
  return mask;
}

namespace {

double cross(PointF o, PointF a, PointF b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(PointF p, PointF a, PointF b) {
  if (std::abs(cross(a, b, p)) > 1e-12 * (1.0 + std::abs(b.x - a.x) + std::abs(b.y - a.y))) return false;
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
         p.y <= std::max(a.y, b.y);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool segments_intersect(PointF a, PointF b, PointF c, PointF d) {
  const int d1 = sign(cross(c, d, a));
  const int d2 = sign(cross(c, d, b));
  const int d3 = sign(cross(a, b, c));
  const int d4 = sign(cross(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  return (d1 == 0 && on_segment(a, c, d)) || (d2 == 0 && on_segment(b, c, d)) ||
         (d3 == 0 && on_segment(c, a, b)) || (d4 == 0 && on_segment(d, a, b));
}

}  // namespace

PixelMask lower_face_mask(std::span<const PointF> landmarks, std::optional<FrameGeometry> clip) {
  const std::size_t n = landmarks.size();
  if (n < 4) throw InvalidArgument("polygon mask needs at least 4 landmarks");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(landmarks[i], landmarks[(i + 1) % n], landmarks[j], landmarks[(j + 1) % n]))
        throw InvalidArgument("landmark polygon is self-intersecting");
    }
  }

  RoiEntry tmp;
  tmp.landmarks.assign(landmarks.begin(), landmarks.end());
  Box box = tmp.bounds();
  if (clip) box = clip_to_frame(box, clip->width, clip->height);
  PixelMask mask{box, std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(0LL, box.area())), 0)};

  std::size_t idx = 0;
  for (int y = box.y; y < box.y + box.h; ++y) {
    for (int x = box.x; x < box.x + box.w; ++x, ++idx) {
      const PointF p{x + 0.5, y + 0.5};
      bool inside = false;
      for (std::size_t i = 0; i < n; ++i) {
        const PointF a = landmarks[i];
        const PointF b = landmarks[(i + 1) % n];
        if (on_segment(p, a, b)) {
          inside = true;
          break;
        }
        if ((a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)) inside = !inside;
      }
      mask.bits[idx] = inside ? 1 : 0;
    }
  }
  return mask;
}

FramePixels select_pixels(const FrameView& frame, const RoiEntry& roi, const PixelSelection& selection) {
  FramePixels out;
  const Box box = clip_to_frame(roi.bounds(), frame.width, frame.height);

  auto take_box = [&] {
    out.pixels.clear();
    out.pixels.reserve(static_cast<std::size_t>(box.area()));
    for (int y = box.y; y < box.y + box.h; ++y)
      for (int x = box.x; x < box.x + box.w; ++x) out.pixels.push_back(frame.at(x, y));
  };

  switch (selection.strategy) {
    case RoiStrategy::bbox:
      take_box();
      break;
    case RoiStrategy::skin: {
      const SkinModel model = selection.model ? *selection.model : fit_skin_model(frame, box, selection.tau);
      for (int y = box.y; y < box.y + box.h; ++y) {
        for (int x = box.x; x < box.x + box.w; ++x) {
          const Rgb p = frame.at(x, y);
          if (model.is_skin(p)) out.pixels.push_back(p);
        }
      }
      if (out.pixels.empty()) {
        take_box();
        out.fallback = true;
      }
      break;
    }
    case RoiStrategy::mask: {
      if (!roi.is_polygon()) throw InvalidArgument("strategy 'mask' requires landmark ROI entries");
      const PixelMask mask = lower_face_mask(roi.landmarks, FrameGeometry{frame.width, frame.height});
      for (int y = mask.region.y; y < mask.region.y + mask.region.h; ++y)
        for (int x = mask.region.x; x < mask.region.x + mask.region.w; ++x)
          if (mask.contains(x, y)) out.pixels.push_back(frame.at(x, y));
      if (out.pixels.empty()) throw InvalidArgument("landmark polygon covers no pixel centers");
      break;
    }
  }
  return out;
}

Signal1D RgbTrace::channel(int c) const {
  switch (c) {
    case 0: return Signal1D(r, fs);
    case 1: return Signal1D(g, fs);
    case 2: return Signal1D(b, fs);
  }
  throw InvalidArgument("channel index must be 0, 1 or 2");
}

RgbTrace mean_rgb_trace(const FrameSequence& seq, const RoiTrack& roi, const PixelSelection& selection) {
  if (!roi.covers_from_start()) throw InvalidArgument("ROI track does not cover frame 0");
  RgbTrace trace;
  trace.fs = seq.fps_hz();
  const std::size_t n = seq.frame_count();
  trace.r.resize(n);
  trace.g.resize(n);
  trace.b.resize(n);
  trace.counts.resize(n);
  for (std::size_t f = 0; f < n; ++f) {
    const FramePixels px = select_pixels(seq.frame(f), roi.at(f), selection);
    // Integer sums: exact and independent of pixel order.
    std::uint64_t sr = 0, sg = 0, sb = 0;
    for (const Rgb& p : px.pixels) {
      sr += p.r;
      sg += p.g;
      sb += p.b;
    }
    const auto count = static_cast<double>(px.pixels.size());
    trace.r[f] = static_cast<double>(sr) / count;
    trace.g[f] = static_cast<double>(sg) / count;
    trace.b[f] = static_cast<double>(sb) / count;
    trace.counts[f] = px.pixels.size();
    if (px.fallback) trace.fallback_frames.push_back(f);
  }
  return trace;
}

}  // namespace rppg
