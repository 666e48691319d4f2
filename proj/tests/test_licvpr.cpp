#include <gtest/gtest.h>

#include <numeric>

#include "oracles.hpp"
#include "rppg/errors.hpp"
#include "rppg/hr.hpp"
#include "rppg/licvpr.hpp"
#include "rppg/params.hpp"
#include "rppg/synth.hpp"

using namespace rppg;

namespace {

SequenceData as_sequence(SynthBundle b) {
  return SequenceData{"x", std::move(b.video), std::move(b.face), std::move(b.landmarks), std::move(b.bvp), b.hr_bpm};
}

}  // namespace

TEST(Percentile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 50), 2.5);
  EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 90), 3.7);
  EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 100), 4.0);
  EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 0), 1.0);
  EXPECT_THROW(percentile({}, 50), InvalidArgument);
}

TEST(BackgroundTrace, GrayLevel) {
  SynthConfig c;
  c.noise_sd = 2;
  c.duration_s = 3;
  const SynthBundle b = generate(c);
  const Signal1D bg = background_trace(b.video, b.face, 4);
  for (double v : bg.samples()) EXPECT_NEAR(v, 128.0, 0.2);
}

TEST(BackgroundTrace, HugeMarginRejected) {
  SynthConfig c;
  c.duration_s = 1;
  const SynthBundle b = generate(c);
  EXPECT_THROW(background_trace(b.video, b.face, 100), InvalidArgument);
}

TEST(BackgroundTrace, FollowsDrift) {
  SynthConfig c;
  c.drift_hz = 0.1;
  c.drift_amplitude = 10;
  c.noise_sd = 1;
  const SynthBundle b = generate(c);
  auto bg = background_trace(b.video, b.face, 8).values();
  const double m = std::accumulate(bg.begin(), bg.end(), 0.0) / static_cast<double>(bg.size());
  for (double& v : bg) v -= m;
  const auto p = oracle::periodogram(bg, 4096);
  const auto k = static_cast<std::size_t>(std::max_element(p.begin() + 1, p.end()) - p.begin());
  EXPECT_NEAR(static_cast<double>(k) * 20.0 / 4096.0, 0.1, 20.0 / 4096.0);
}

TEST(MotionElimination, ConstantKeepsEverything) {
  const MotionElimination me = eliminate_motion_segments(Signal1D(std::vector<double>(100, 3.0), 10.0), 1.0, 90);
  EXPECT_TRUE(me.discarded_segments.empty());
  EXPECT_EQ(me.signal.size(), 100u);
}

TEST(MotionElimination, DropsSpikeSegment) {
  std::mt19937_64 rng(31);
  auto x = oracle::random_vector(rng, 200);
  for (std::size_t i = 120; i < 140; ++i) x[i] *= 100.0;
  const MotionElimination me = eliminate_motion_segments(Signal1D(x, 20.0), 1.0, 90);
  EXPECT_EQ(me.discarded_segments, (std::vector<std::size_t>{6}));
  EXPECT_EQ(me.signal.size(), 180u);
}

TEST(MotionElimination, NearHundredDropsAtMostLargest) {
  std::mt19937_64 rng(32);
  const auto x = oracle::random_vector(rng, 400);
  const MotionElimination me = eliminate_motion_segments(Signal1D(x, 20.0), 1.0, 99.999);
  EXPECT_LE(me.discarded_segments.size(), 1u);
  const MotionElimination all = eliminate_motion_segments(Signal1D(x, 20.0), 1.0, 100.0);
  EXPECT_TRUE(all.discarded_segments.empty());
}

TEST(MotionElimination, SurvivorsKeepOrder) {
  std::mt19937_64 rng(33);
  auto x = oracle::random_vector(rng, 205);
  for (std::size_t i = 40; i < 60; ++i) x[i] *= 30.0;
  for (std::size_t i = 140; i < 160; ++i) x[i] *= 50.0;
  const MotionElimination me = eliminate_motion_segments(Signal1D(x, 20.0), 1.0, 80);
  ASSERT_EQ(me.kept_samples.size(), me.signal.size());
  for (std::size_t i = 1; i < me.kept_samples.size(); ++i) EXPECT_LT(me.kept_samples[i - 1], me.kept_samples[i]);
  // Within a segment, samples differ from the source only by that segment's constant shift.
  for (std::size_t i = 1; i < me.kept_samples.size(); ++i) {
    const std::size_t a = me.kept_samples[i - 1], b = me.kept_samples[i];
    if (a / me.segment_len != b / me.segment_len) continue;
    EXPECT_NEAR(me.signal[i] - me.signal[i - 1], x[b] - x[a], 1e-12);
  }
  for (std::size_t k : me.discarded_segments)
    for (std::size_t idx : me.kept_samples) EXPECT_NE(idx / me.segment_len, k);
}

TEST(MotionElimination, GapsAreMeanMatched) {
  // Segments at levels 0, spike, 10: after removal the tail and head levels meet.
  std::vector<double> x(60, 0.0);
  for (std::size_t i = 20; i < 40; ++i) x[i] = (i % 2 ? 500.0 : -500.0);
  for (std::size_t i = 40; i < 60; ++i) x[i] = 10.0 + 0.01 * static_cast<double>(i % 2);
  const MotionElimination me = eliminate_motion_segments(Signal1D(x, 20.0), 1.0, 50);
  EXPECT_EQ(me.discarded_segments, (std::vector<std::size_t>{1}));
  ASSERT_EQ(me.signal.size(), 40u);
  EXPECT_NEAR(me.signal[20], 0.0, 0.01);
}

TEST(Licvpr, ZeroBackgroundConstantGreen) {
  const Signal1D g(std::vector<double>(400, 120.0), 20.0);
  const Signal1D bg(std::vector<double>(400, 0.0), 20.0);
  const PulseSignal p = licvpr_pulse(g, bg, {});
  for (double v : p.signal.samples()) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(Licvpr, SyntheticRecoversHeartRate) {
  const SequenceData seq = as_sequence(generate(SynthConfig{}));
  const AlgorithmParams params = make_params(Algorithm::licvpr);
  const PulseSignal p = extract_pulse(seq, params);
  EXPECT_NEAR(estimate_hr(p, params).bpm, 72.0, 0.6);
  EXPECT_GT(p.discarded_fraction, 0.0);
}

TEST(Licvpr, RectificationDoesNotHurtUnderDrift) {
  SynthConfig c;
  c.hr_bpm = 83;
  c.noise_sd = 2;
  c.drift_hz = 0.1;
  c.drift_amplitude = 20;
  c.seed = 4;
  const SequenceData seq = as_sequence(generate(c));
  const AlgorithmParams on = make_params(Algorithm::licvpr);
  const AlgorithmParams off = make_params(Algorithm::licvpr, {{"licvpr.rectify", "false"}});
  const double err_on = std::abs(estimate_hr(extract_pulse(seq, on), on).bpm - c.hr_bpm);
  const double err_off = std::abs(estimate_hr(extract_pulse(seq, off), off).bpm - c.hr_bpm);
  EXPECT_LE(err_on, err_off);
}

TEST(Licvpr, DeterministicBitForBit) {
  SynthConfig c;
  c.noise_sd = 2;
  c.duration_s = 20;
  const SequenceData seq = as_sequence(generate(c));
  const AlgorithmParams params = make_params(Algorithm::licvpr);
  EXPECT_EQ(extract_pulse(seq, params).signal.values(), extract_pulse(seq, params).signal.values());
}

TEST(Licvpr, PlainPathIsDetrendSmoothBandpass) {
  std::mt19937_64 rng(34);
  auto g = oracle::random_vector(rng, 600);
  for (double& v : g) v += 120.0;
  const Signal1D green(g, 20.0);
  const Signal1D bg(std::vector<double>(600, 128.0), 20.0);
  LiParams params;
  params.rectify = false;
  params.discard_percentile = 100.0;
  const PulseSignal p = licvpr_pulse(green, bg, params);
  const Signal1D want =
      bandpass(moving_average(detrend_smoothness_priors(green, params.detrend_lambda), params.ma_window), params.band);
  EXPECT_EQ(p.signal.values(), want.values());
  EXPECT_EQ(p.discarded_fraction, 0.0);
}

TEST(Licvpr, ValidatesParams) {
  const Signal1D g(std::vector<double>(100, 1.0), 20.0);
  LiParams p;
  p.ma_window = 4;
  EXPECT_THROW(licvpr_pulse(g, g, p), InvalidArgument);
  EXPECT_THROW(licvpr_pulse(g, Signal1D(std::vector<double>(99, 1.0), 20.0), LiParams{}), InvalidArgument);
}
