#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "oracles.hpp"
#include "rppg/errors.hpp"
#include "rppg/synth.hpp"
#include "test_util.hpp"

using namespace rppg;
using testutil::slurp;
using testutil::TempDir;

namespace {

/// Mean of one channel over a rectangle, straight from the bytes.
std::vector<double> rect_mean(const FrameSequence& seq, const Box& r, int channel) {
  std::vector<double> out;
  for (std::size_t f = 0; f < seq.frame_count(); ++f) {
    const auto* base = seq.data().data() + f * seq.frame_bytes();
    double sum = 0.0;
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x)
        sum += base[(static_cast<std::size_t>(y) * static_cast<std::size_t>(seq.width()) + static_cast<std::size_t>(x)) * 3 +
                    static_cast<std::size_t>(channel)];
    out.push_back(sum / static_cast<double>(r.area()));
  }
  return out;
}

std::size_t argmax(const std::vector<double>& v, std::size_t from) {
  return static_cast<std::size_t>(std::max_element(v.begin() + static_cast<long>(from), v.end()) - v.begin());
}

}  // namespace

TEST(Synth, GreenTraceHasPulsePeak) {
  SynthConfig c;
  c.pulse_amplitude = {0.4, 1.0, 0.6};
  const SynthBundle b = generate(c);
  auto g = rect_mean(b.video, c.resolved_skin_rect(), 1);
  const double m = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
  for (double& v : g) v -= m;
  const std::size_t nfft = 4096;
  const auto p = oracle::periodogram(g, nfft);
  const double f = static_cast<double>(argmax(p, 1)) * 20.0 / static_cast<double>(nfft);
  EXPECT_NEAR(f, 1.2, 20.0 / static_cast<double>(nfft));
}

TEST(Synth, NoPulseNoNoiseIsStatic) {
  SynthConfig c;
  c.pulse_amplitude = {0, 0, 0};
  c.duration_s = 5;
  const SynthBundle b = generate(c);
  const auto first = b.video.frame(0);
  for (std::size_t f = 1; f < b.video.frame_count(); ++f) {
    const auto fr = b.video.frame(f);
    EXPECT_TRUE(std::equal(first.pixels.begin(), first.pixels.end(), fr.pixels.begin()));
  }
}

TEST(Synth, SameSeedSameBytes) {
  TempDir dir("synth_det");
  SynthConfig c;
  c.noise_sd = 2.0;
  c.duration_s = 5;
  c.seed = 99;
  write_bundle(generate(c), dir / "a");
  write_bundle(generate(c), dir / "b");
  for (const char* f : {"seq.rvid", "roi.csv", "landmarks.csv", "bvp.csv", "bvp.json", "hr.json"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  c.seed = 100;
  write_bundle(generate(c), dir / "c");
  EXPECT_NE(slurp(dir / "a" / "seq.rvid"), slurp(dir / "c" / "seq.rvid"));
}

TEST(Synth, TruthHrIsExact) {
  TempDir dir("synth_truth");
  SynthConfig c;
  c.hr_bpm = 73.123456789;
  c.duration_s = 3;
  const SynthBundle b = generate(c);
  EXPECT_EQ(b.hr_bpm, c.hr_bpm);
  write_bundle(b, dir.path());
  EXPECT_EQ(read_truth_hr(dir / "hr.json"), c.hr_bpm);
}

TEST(Synth, SkinMeanWithinRoundingBound) {
  SynthConfig c;
  c.duration_s = 10;
  const SynthBundle b = generate(c);
  const Box r = c.resolved_skin_rect();
  const double bound = 0.5 / std::sqrt(static_cast<double>(r.area()));
  for (int ch = 0; ch < 3; ++ch) {
    const auto m = rect_mean(b.video, r, ch);
    for (std::size_t f = 0; f < m.size(); ++f) {
      const double t = static_cast<double>(f) / 20.0;
      const double want = c.skin_base_rgb[static_cast<std::size_t>(ch)] +
                          c.pulse_amplitude[static_cast<std::size_t>(ch)] * std::sin(2.0 * std::numbers::pi * 1.2 * t);
      EXPECT_LE(std::abs(m[f] - want), bound) << "channel " << ch << " frame " << f;
    }
  }
}

TEST(Synth, ClippingRejected) {
  SynthConfig c;
  c.skin_base_rgb = {255, 120, 100};
  c.pulse_amplitude = {20, 1, 1};
  c.duration_s = 2;
  EXPECT_THROW(generate(c), InvalidArgument);
}

TEST(Synth, ConfigValidation) {
  SynthConfig c;
  c.hr_bpm = 30;
  EXPECT_THROW(generate(c), InvalidArgument);
  c = SynthConfig{};
  c.skin_rect = Box{90, 0, 20, 10};
  EXPECT_THROW(generate(c), InvalidArgument);
}

TEST(Synth, RoiTracksMatchSkinRect) {
  SynthConfig c;
  c.duration_s = 1;
  const SynthBundle b = generate(c);
  const Box s = c.resolved_skin_rect();
  EXPECT_EQ(*b.face.at(0).box, (Box{s.x - 8, s.y - 8, s.w + 16, s.h + 16}));
  EXPECT_EQ(b.landmarks.at(0).bounds(), s);
}

TEST(Synth, BvpPeaksAtBeatTimes) {
  SynthConfig c;
  c.hr_bpm = 66;
  c.duration_s = 20;
  const SynthBundle b = generate(c);
  const auto beats = beat_times(c);
  EXPECT_EQ(beats.size(), static_cast<std::size_t>(std::floor(20 * 1.1 - 0.25)) + 1);
  for (double t : beats) {
    const auto k = static_cast<std::size_t>(std::llround(t * 256.0));
    EXPECT_GT(b.bvp.signal[k], 0.999);
  }
}

TEST(Synth, DatasetConfigs) {
  SynthConfig base;
  const auto a = dataset_configs(base, 16, 50, 110, 5);
  const auto b = dataset_configs(base, 16, 50, 110, 5);
  ASSERT_EQ(a.size(), 16u);
  std::set<std::string> subjects;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].hr_bpm, b[i].hr_bpm);
    EXPECT_EQ(a[i].seed, b[i].seed);
    EXPECT_GE(a[i].hr_bpm, 50.0);
    EXPECT_LE(a[i].hr_bpm, 110.0);
    subjects.insert(a[i].subject_id);
  }
  EXPECT_EQ(subjects.size(), 16u);
  EXPECT_EQ(a[3].sequence_id, "s03");
  const ProtocolIndex p = dataset_protocol(a, 4, "syn");
  EXPECT_EQ(p.split(Split::train).size(), 4u);
  EXPECT_EQ(p.split(Split::test).size(), 12u);
}
