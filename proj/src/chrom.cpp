#include "rppg/chrom.hpp"

#include <string>

#include "rppg/errors.hpp"

namespace rppg {

namespace {
// Channels are normalized to unit mean, so an absolute floor is scale-free.
// Below it sd(Yf) is rounding noise and alpha would explode.
constexpr double kFlatChrominance = 1e-10;
}  // namespace

std::size_t ChromParams::window_frames(double fps) const {
  const std::size_t len = even_frame_count(window_s, fps);
  if (len < 8) throw InvalidArgument("CHROM window must span at least 8 frames");
  return len;
}

PulseSignal chrom_pulse(const RgbTrace& trace, const ChromParams& params) {
  const std::size_t n = trace.size();
  if (n == 0 || trace.g.size() != n || trace.b.size() != n) throw InvalidArgument("CHROM needs a non-empty RGB trace");
  const double fs = trace.fs;
  params.band.validate(fs);
  const std::size_t len = params.window_frames(fs);
  if (len > n) throw InvalidArgument("trace shorter than one CHROM window");

  const auto starts = analysis_window_starts(n, len);
  std::vector<std::vector<double>> blocks;
  blocks.reserve(starts.size());
  for (std::size_t w = 0; w < starts.size(); ++w) {
    const std::size_t s0 = starts[w];
    const std::span<const double> r(trace.r.data() + s0, len);
    const std::span<const double> g(trace.g.data() + s0, len);
    const std::span<const double> b(trace.b.data() + s0, len);
    const double mr = mean(r), mg = mean(g), mb = mean(b);
    if (mr == 0.0 || mg == 0.0 || mb == 0.0)
      throw NumericDegeneracy("CHROM window " + std::to_string(w) + " (frame " + std::to_string(s0) +
                              ") has a zero channel mean");

    std::vector<double> x(len), y(len);
    for (std::size_t i = 0; i < len; ++i) {
      const double rn = r[i] / mr, gn = g[i] / mg, bn = b[i] / mb;
      x[i] = 3.0 * rn - 2.0 * gn;
      y[i] = 1.5 * rn + gn - 1.5 * bn;
    }
    const Signal1D xf = bandpass(Signal1D(std::move(x), fs), params.band, params.filter_taps);
    const Signal1D yf = bandpass(Signal1D(std::move(y), fs), params.band, params.filter_taps);
    const double sy = stddev(yf.samples());
    const double alpha = sy > kFlatChrominance ? stddev(xf.samples()) / sy : 0.0;

    std::vector<double> s(len);
    for (std::size_t i = 0; i < len; ++i) s[i] = xf[i] - alpha * yf[i];
    const double ms = mean(s);
    for (double& v : s) v -= ms;
    blocks.push_back(std::move(s));
  }

  std::vector<double> out = overlap_add(blocks, starts, n);
  const double mo = mean(out);
  for (double& v : out) v -= mo;
  return PulseSignal{Signal1D(std::move(out), fs), Algorithm::chrom, trace.fallback_fraction(), 0.0, 0};
}

}  // namespace rppg
