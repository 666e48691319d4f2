#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>

#include "rppg/media_io.hpp"
#include "test_util.hpp"

using namespace rppg;
using namespace testutil;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(const TempDir& dir, const std::string& args) {
  const auto out = dir.path() / "stdout.txt";
  const auto err = dir.path() / "stderr.txt";
  const std::string cmd = std::string("'") + RPPG_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("cli");
    const CliRun r = run(*dir_, "synth --out " + q(dir_->path() / "seq") +
                                 " --hr 72 --seed 7 --duration 30 --noise 1");
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::filesystem::path seq() { return dir_->path() / "seq"; }
  static TempDir* dir_;
};

TempDir* CliTest::dir_ = nullptr;

}  // namespace

TEST_F(CliTest, SynthWritesBundle) {
  for (const char* f : {"seq.rvid", "roi.csv", "landmarks.csv", "bvp.csv", "bvp.json", "hr.json"})
    EXPECT_TRUE(std::filesystem::exists(seq() / f)) << f;
}

class CliPipeline : public CliTest, public ::testing::WithParamInterface<const char*> {};

TEST_P(CliPipeline, PulseThenHr) {
  const auto out = dir_->path() / (std::string("pulse_") + GetParam() + ".csv");
  const CliRun p = run(*dir_, "pulse " + q(seq() / "seq.rvid") + " --roi " + q(seq() / "roi.csv") + " --algo " +
                               GetParam() + " --out " + q(out));
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(slurp(out).rfind("t,value\n", 0), 0u);
  const CliRun h = run(*dir_, "hr " + q(out));
  ASSERT_EQ(h.code, 0) << h.err;
  EXPECT_NEAR(std::stod(h.out), 72.0, 0.6);
}

INSTANTIATE_TEST_SUITE_P(Algorithms, CliPipeline, ::testing::Values("chrom", "licvpr", "ssr"));

TEST_F(CliTest, HrFromBvpPeaks) {
  const CliRun h = run(*dir_, "hr --peaks " + q(seq() / "bvp.csv"));
  ASSERT_EQ(h.code, 0) << h.err;
  EXPECT_NEAR(std::stod(h.out), 72.0, 0.6);
}

TEST_F(CliTest, TraceHasHeaderAndOneRowPerFrame) {
  const auto out = dir_->path() / "trace.csv";
  const CliRun r =
      run(*dir_, "trace " + q(seq() / "seq.rvid") + " --roi " + q(seq() / "roi.csv") + " --out " + q(out));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(out);
  EXPECT_EQ(text.rfind("t,r,g,b,pixels\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 601);
}

TEST_F(CliTest, RerunsAreByteIdentical) {
  const auto a = dir_->path() / "rerun_a.csv";
  const auto b = dir_->path() / "rerun_b.csv";
  const std::string base = "pulse " + q(seq() / "seq.rvid") + " --roi " + q(seq() / "roi.csv") +
                           " --algo licvpr --set licvpr.lambda=200 --out ";
  ASSERT_EQ(run(*dir_, base + q(a)).code, 0);
  ASSERT_EQ(run(*dir_, base + q(b)).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  auto meta = [](std::filesystem::path p) { return slurp(p.replace_extension(".json")); };
  EXPECT_EQ(meta(a), meta(b));
  EXPECT_NE(meta(a).find("\"licvpr.lambda\""), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run(*dir_, "frobnicate").code, 1);
  EXPECT_EQ(run(*dir_, "hr --bogus-flag x").code, 1);
  EXPECT_EQ(run(*dir_, "pulse " + q(seq() / "seq.rvid") + " --roi " + q(seq() / "roi.csv") + " --algo pca").code, 1);
  const CliRun r = run(*dir_, "pulse " + q(seq() / "seq.rvid") + " --roi " + q(seq() / "roi.csv") +
                               " --algo chrom --set chrom.nope=1");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("chrom.nope"), std::string::npos);
}

TEST_F(CliTest, MissingFileExitsTwoAndNamesIt) {
  const auto missing = dir_->path() / "nowhere" / "seq.rvid";
  const CliRun r = run(*dir_, "pulse " + q(missing) + " --roi " + q(seq() / "roi.csv") + " --algo chrom");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(missing.string()), std::string::npos);
}

TEST_F(CliTest, DegenerateInputExitsThree) {
  // Every pixel the same colour: the 2SR subspace is rank one throughout.
  const int w = 32, h = 24;
  const std::size_t frames = 60;
  std::vector<std::uint8_t> data(frames * w * h * 3);
  for (std::size_t i = 0; i < data.size(); i += 3) {
    data[i] = 180;
    data[i + 1] = 120;
    data[i + 2] = 100;
  }
  const auto video = dir_->path() / "flat.rvid";
  write_rvid(FrameSequence(w, h, Rational{20, 1}, frames, std::move(data)), video);
  spit(dir_->path() / "flat_roi.csv", "frame,x,y,w,h\n0,4,4,24,16\n");
  const CliRun r = run(*dir_, "pulse " + q(video) + " --roi " + q(dir_->path() / "flat_roi.csv") +
                               " --algo ssr --set ssr.strategy=bbox --out " + q(dir_->path() / "flat.csv"));
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(CliDataset, EvalAndSearchAreDeterministic) {
  TempDir dir("cli_ds");
  const auto ds = dir.path() / "ds";
  ASSERT_EQ(run(dir, "synth --out " + q(ds) +
                         " --count 6 --train 3 --hr-min 55 --hr-max 100 --seed 3 --duration 12 "
                         "--noise 1")
                .code,
            0);
  ASSERT_TRUE(std::filesystem::exists(ds / "protocol.csv"));
  const std::string eval = "eval --protocol " + q(ds / "protocol.csv") + " --algo chrom --out ";
  const CliRun a = run(dir, eval + q(dir.path() / "a.json") + " --jobs 1");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(run(dir, eval + q(dir.path() / "b.json") + " --jobs 2").code, 0);
  EXPECT_EQ(slurp(dir.path() / "a.json"), slurp(dir.path() / "b.json"));
  ASSERT_EQ(run(dir, eval + q(dir.path() / "a.csv")).code, 0);
  EXPECT_EQ(slurp(dir.path() / "a.csv").rfind("sequence_id,estimated_bpm,ground_truth_bpm,status\n", 0), 0u);

  spit(dir.path() / "stages.json", R"({"stages":[{"name":"window","params":{"chrom.window_s":[1.2,1.6]}}]})");
  const std::string search = "search --protocol " + q(ds / "protocol.csv") + " --algo chrom --stages " +
                             q(dir.path() / "stages.json") + " --out ";
  const CliRun s = run(dir, search + q(dir.path() / "s1.json"));
  ASSERT_EQ(s.code, 0) << s.err;
  ASSERT_EQ(run(dir, search + q(dir.path() / "s2.json") + " --jobs 2").code, 0);
  EXPECT_EQ(slurp(dir.path() / "s1.json"), slurp(dir.path() / "s2.json"));

  std::filesystem::remove(ds / "s01" / "seq.rvid");
  const CliRun m = run(dir, "eval --protocol " + q(ds / "protocol.csv") + " --algo chrom --split train --out " +
                             q(dir.path() / "m.csv"));
  EXPECT_EQ(m.code, 2);
  EXPECT_NE(m.err.find("s01"), std::string::npos);
}
