#include "rppg/licvpr.hpp"

#include <algorithm>
#include <cmath>

#include "rppg/errors.hpp"

namespace rppg {

void LiParams::validate() const {
  if (!(segment_s > 0.0)) throw InvalidArgument("licvpr: segment length must be positive");
  if (!(discard_percentile >= 0.0 && discard_percentile <= 100.0))
    throw InvalidArgument("licvpr: percentile must lie in [0, 100]");
  if (!std::isfinite(detrend_lambda) || detrend_lambda < 0.0) throw InvalidArgument("licvpr: lambda must be >= 0");
  if (ma_window == 0 || ma_window % 2 == 0) throw InvalidArgument("licvpr: moving-average window must be odd");
  if (background_margin < 0) throw InvalidArgument("licvpr: background margin must be non-negative");
}

Signal1D background_trace(const FrameSequence& seq, const RoiTrack& face, int margin) {
  if (!face.covers_from_start()) throw InvalidArgument("ROI track does not cover frame 0");
  const std::size_t n = seq.frame_count();
  std::vector<double> out(n);
  for (std::size_t f = 0; f < n; ++f) {
    const FrameView frame = seq.frame(f);
    const Box b = face.at(f).bounds();
    const int x0 = std::clamp(b.x - margin, 0, frame.width);
    const int y0 = std::clamp(b.y - margin, 0, frame.height);
    const int x1 = std::clamp(b.x + b.w + margin, 0, frame.width);
    const int y1 = std::clamp(b.y + b.h + margin, 0, frame.height);
    std::uint64_t total = 0, inner = 0;
    for (int y = 0; y < frame.height; ++y)
      for (int x = 0; x < frame.width; ++x) {
        const std::uint64_t g = frame.at(x, y).g;
        total += g;
        if (x >= x0 && x < x1 && y >= y0 && y < y1) inner += g;
      }
    const long long count = static_cast<long long>(frame.width) * frame.height -
                            static_cast<long long>(std::max(0, x1 - x0)) * std::max(0, y1 - y0);
    if (count <= 0) throw InvalidArgument("no background pixels outside the expanded face box");
    out[f] = static_cast<double>(total - inner) / static_cast<double>(count);
  }
  return Signal1D(std::move(out), seq.fps_hz());
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("percentile of an empty set");
  if (!(p >= 0.0 && p <= 100.0)) throw InvalidArgument("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (rank - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

MotionElimination eliminate_motion_segments(const Signal1D& s, double segment_s, double p) {
  const std::size_t n = s.size();
  const double fs = s.fs();
  const std::size_t len = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(segment_s * fs)));
  const std::size_t count = (n + len - 1) / len;
  if (count < 2) throw InvalidArgument("motion elimination needs at least two segments");

  const auto x = s.samples();
  std::vector<double> sds(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t a = k * len;
    sds[k] = stddev(x.subspan(a, std::min(len, n - a)));
  }
  const double threshold = percentile(sds, p);
  const auto match_len = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fs)));

  MotionElimination out{Signal1D({0.0}, fs), {}, {}, len};
  std::vector<double> kept;
  kept.reserve(n);
  bool gap = false;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t a = k * len;
    const std::size_t m = std::min(len, n - a);
    if (sds[k] > threshold) {
      out.discarded_segments.push_back(k);
      gap = true;
      continue;
    }
    double shift = 0.0;
    if (gap && !kept.empty()) {
      const std::size_t tail = std::min(match_len, kept.size());
      const std::size_t head = std::min(match_len, m);
      shift = mean(std::span<const double>(kept).last(tail)) - mean(x.subspan(a, head));
    }
    gap = false;
    for (std::size_t i = 0; i < m; ++i) {
      kept.push_back(x[a + i] + shift);
      out.kept_samples.push_back(a + i);
    }
  }
  out.signal = Signal1D(std::move(kept), fs);
  return out;
}

PulseSignal licvpr_pulse(const Signal1D& face_green, const Signal1D& background, const LiParams& params) {
  params.validate();
  if (face_green.size() != background.size() || face_green.fs() != background.fs())
    throw InvalidArgument("face and background traces must share length and rate");
  params.band.validate(face_green.fs());

  Signal1D s = params.rectify ? nlms_rectify(face_green, background, params.nlms) : face_green;
  double discarded = 0.0;
  if (params.eliminate_motion) {
    MotionElimination me = eliminate_motion_segments(s, params.segment_s, params.discard_percentile);
    discarded = 1.0 - static_cast<double>(me.signal.size()) / static_cast<double>(s.size());
    s = std::move(me.signal);
  }
  s = detrend_smoothness_priors(s, params.detrend_lambda);
  if (params.ma_window > 1) s = moving_average(s, params.ma_window);
  s = bandpass(s, params.band, params.filter_taps);
  return PulseSignal{std::move(s), Algorithm::licvpr, 0.0, discarded, 0};
}

}  // namespace rppg
