#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rppg/chrom.hpp"
#include "rppg/errors.hpp"
#include "rppg/hr.hpp"
#include "rppg/synth.hpp"

using namespace rppg;

namespace {

RgbTrace make_trace(std::vector<double> r, std::vector<double> g, std::vector<double> b, double fs) {
  RgbTrace t;
  t.r = std::move(r);
  t.g = std::move(g);
  t.b = std::move(b);
  t.counts.assign(t.r.size(), 100);
  t.fs = fs;
  return t;
}

RgbTrace synthetic_trace(const SynthConfig& c) {
  const SynthBundle b = generate(c);
  return mean_rgb_trace(b.video, b.face, PixelSelection{RoiStrategy::skin, 0.3, std::nullopt});
}

}  // namespace

TEST(AnalysisWindows, CoverEveryFrame) {
  for (std::size_t n : {32u, 33u, 47u, 48u, 100u, 1200u, 1201u}) {
    const auto starts = analysis_window_starts(n, 32);
    std::vector<int> covered(n, 0);
    for (std::size_t s : starts)
      for (std::size_t i = s; i < s + 32; ++i) covered[i]++;
    for (std::size_t i = 0; i < n; ++i) EXPECT_GE(covered[i], 1) << "n " << n << " i " << i;
    EXPECT_EQ(starts.back() + 32, n);
  }
  EXPECT_EQ(analysis_window_starts(64, 32), (std::vector<std::size_t>{0, 16, 32}));
  EXPECT_EQ(analysis_window_starts(70, 32), (std::vector<std::size_t>{0, 16, 32, 38}));
}

TEST(ChromParams, WindowFrames) {
  ChromParams p;
  EXPECT_EQ(p.window_frames(20.0), 32u);
  p.window_s = 1.0;
  EXPECT_EQ(p.window_frames(25.0), 26u);
  p.window_s = 0.3;
  EXPECT_THROW(p.window_frames(20.0), InvalidArgument);
}

TEST(Chrom, ConstantTraceGivesZero) {
  const RgbTrace t = make_trace(std::vector<double>(200, 150.0), std::vector<double>(200, 100.0),
                                std::vector<double>(200, 80.0), 20.0);
  const PulseSignal p = chrom_pulse(t, {});
  EXPECT_EQ(p.signal.size(), 200u);
  for (double v : p.signal.samples()) EXPECT_NEAR(v, 0.0, 1e-15);
  EXPECT_EQ(p.source, Algorithm::chrom);
}

TEST(Chrom, SyntheticRecoversHeartRate) {
  SynthConfig c;
  c.pulse_amplitude = {0.4, 1.0, 0.6};
  const PulseSignal p = chrom_pulse(synthetic_trace(c), {});
  EXPECT_NEAR(estimate_hr_spectral(p.signal).bpm, 72.0, 0.6);
}

TEST(Chrom, ScaleInvariant) {
  std::mt19937_64 rng(21);
  auto noise = [&] { return oracle::random_vector(rng, 300, 0.5); };
  auto add = [](std::vector<double> v, double base) {
    for (double& x : v) x += base;
    return v;
  };
  const RgbTrace t = make_trace(add(noise(), 150), add(noise(), 100), add(noise(), 80), 20.0);
  const auto base = chrom_pulse(t, {}).signal.values();
  for (double c : {0.37, 2.0, 1234.5}) {
    RgbTrace s = t;
    for (auto* ch : {&s.r, &s.g, &s.b})
      for (double& v : *ch) v *= c;
    const auto scaled = chrom_pulse(s, {}).signal.values();
    double scale = 0.0;
    for (double v : base) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(scaled[i], base[i], 1e-9 * scale);
  }
}

TEST(Chrom, FlatChrominanceYFallsBackToX) {
  // B proportional to R and G constant keep Y = 1.5Rn + Gn - 1.5Bn constant.
  const std::size_t n = 64;
  const auto wave = oracle::tone(1.5, 20.0, n, 2.0);
  std::vector<double> r(n), g(n, 100.0), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = 150.0 + wave[i];
    b[i] = 0.5 * r[i];
  }
  const ChromParams params;
  const PulseSignal p = chrom_pulse(make_trace(r, g, b, 20.0), params);

  // Expected: per window, bandpassed X with its mean removed, Hann overlap-added.
  const auto starts = analysis_window_starts(n, 32);
  std::vector<std::vector<double>> blocks;
  for (std::size_t s : starts) {
    double mr = 0.0;
    for (std::size_t i = s; i < s + 32; ++i) mr += r[i];
    mr /= 32.0;
    std::vector<double> x(32);
    for (std::size_t i = 0; i < 32; ++i) x[i] = 3.0 * r[s + i] / mr - 2.0;
    auto xf = bandpass(Signal1D(x, 20.0), params.band).values();
    const double m = mean(xf);
    for (double& v : xf) v -= m;
    blocks.push_back(xf);
  }
  auto want = overlap_add(blocks, starts, n);
  const double mw = mean(want);
  for (double& v : want) v -= mw;
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(p.signal[i], want[i], 1e-12);
  EXPECT_GT(stddev(p.signal.samples()), 1e-3);
}

TEST(Chrom, ZeroChannelMeanNamesWindow) {
  std::vector<double> r(100, 150.0), g(100, 100.0), b(100, 80.0);
  for (std::size_t i = 40; i < 100; ++i) b[i] = 0.0;
  try {
    chrom_pulse(make_trace(r, g, b, 20.0), {});
    FAIL() << "expected NumericDegeneracy";
  } catch (const NumericDegeneracy& e) {
    EXPECT_NE(std::string(e.what()).find("window 3"), std::string::npos) << e.what();
  }
}

TEST(Chrom, RejectsShortTrace) {
  const RgbTrace t = make_trace(std::vector<double>(20, 1.0), std::vector<double>(20, 1.0),
                                std::vector<double>(20, 1.0), 20.0);
  EXPECT_THROW(chrom_pulse(t, {}), InvalidArgument);
}
