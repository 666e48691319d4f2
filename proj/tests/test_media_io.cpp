#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "rppg/errors.hpp"
#include "rppg/media_io.hpp"
#include "test_util.hpp"

using namespace rppg;
using testutil::slurp;
using testutil::spit;
using testutil::TempDir;

namespace {

FrameSequence small_sequence() {
  std::vector<std::uint8_t> data(2 * 4 * 4 * 3);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<std::uint8_t>(i * 7 % 256);
  return FrameSequence(4, 4, Rational{20, 1}, 2, std::move(data), "small");
}

std::string protocol_text(int train, int test, const std::string& condition) {
  std::ostringstream out;
  out << "sequence_id,split,condition\n";
  for (int i = 0; i < train + test; ++i) out << "seq" << i << ',' << (i < train ? "train" : "test") << ',' << condition << '\n';
  return out.str();
}

}  // namespace

TEST(Rvid, RoundTripIsByteIdentical) {
  TempDir dir("rvid_rt");
  const FrameSequence seq = small_sequence();
  write_rvid(seq, dir / "a.rvid");
  const FrameSequence back = read_rvid(dir / "a.rvid");
  EXPECT_EQ(back.data(), seq.data());
  EXPECT_EQ(back.width(), 4);
  EXPECT_EQ(back.fps(), (Rational{20, 1}));
  write_rvid(back, dir / "b.rvid");
  EXPECT_EQ(slurp(dir / "a.rvid"), slurp(dir / "b.rvid"));
  EXPECT_EQ(back.sequence_id(), "a");
}

TEST(Rvid, HeaderAt640x480) {
  const RvidHeader h = parse_rvid_header("RVID1 640 480 20/1 1200\n");
  EXPECT_EQ(h.width, 640);
  EXPECT_EQ(h.height, 480);
  EXPECT_EQ(h.fps, (Rational{20, 1}));
  EXPECT_EQ(h.frame_count, 1200u);
  EXPECT_EQ(h.payload_bytes(), 1200ull * 640 * 480 * 3);
  EXPECT_EQ(format_rvid_header(640, 480, {20, 1}, 1200), "RVID1 640 480 20/1 1200\n");
}

TEST(Rvid, TruncatedPayloadReportsOffset) {
  TempDir dir("rvid_trunc");
  const std::string header = format_rvid_header(2, 2, {20, 1}, 10);
  spit(dir / "t.rvid", header + std::string(9 * 2 * 2 * 3, '\x10'));
  try {
    read_rvid(dir / "t.rvid");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    ASSERT_TRUE(e.byte_offset().has_value());
    EXPECT_EQ(*e.byte_offset(), header.size() + 9 * 2 * 2 * 3);
  }
}

TEST(Rvid, RejectsBadHeaders) {
  for (const char* h : {"RVID2 4 4 20/1 1", "RVID1 0 4 20/1 1", "RVID1 4 4 20/0 1", "RVID1 4 4 20 1", "RVID1 4 4 20/1",
                        "RVID1 -4 4 20/1 1", "RVID1 4 4 20/1 1 extra"})
    EXPECT_THROW(parse_rvid_header(h), FormatError) << h;
}

TEST(Rvid, TrailingBytesRejected) {
  TempDir dir("rvid_trail");
  spit(dir / "t.rvid", format_rvid_header(1, 1, {20, 1}, 1) + "abcd");
  EXPECT_THROW(read_rvid(dir / "t.rvid"), FormatError);
}

TEST(Rvid, MissingFileIsIoError) { EXPECT_THROW(read_rvid("/nonexistent/x.rvid"), IoError); }

TEST(Physio, ReadsSidecarAndSamples) {
  TempDir dir("physio");
  std::ostringstream csv;
  csv << "t,value\n";
  for (int i = 0; i < 256; ++i) csv << i / 256.0 << ',' << std::sin(i * 0.1) << '\n';
  spit(dir / "b.csv", csv.str());
  spit(dir / "b.json", R"({"subject_id": "p1", "lighting": "natural", "sample_rate_hz": 256, "signal_type": "bvp"})");
  const PhysioSignal s = read_physio_csv(dir / "b.csv", dir / "b.json");
  EXPECT_EQ(s.fs(), 256.0);
  EXPECT_EQ(s.signal.size(), 256u);
  EXPECT_EQ(s.subject_id, "p1");
  EXPECT_EQ(s.lighting, Lighting::natural);
  EXPECT_EQ(s.kind, PhysioKind::bvp);
}

TEST(Physio, EmptyAndRepeatedTimestampsRejected) {
  TempDir dir("physio_bad");
  spit(dir / "b.json", R"({"subject_id": "p1", "lighting": "studio", "sample_rate_hz": 256, "signal_type": "bvp"})");
  spit(dir / "b.csv", "t,value\n");
  EXPECT_THROW(read_physio_csv(dir / "b.csv", dir / "b.json"), FormatError);
  spit(dir / "b.csv", "t,value\n0,1\n0.5,2\n0.5,3\n");
  try {
    read_physio_csv(dir / "b.csv", dir / "b.json");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    ASSERT_TRUE(e.row().has_value());
    EXPECT_EQ(*e.row(), 3u);  // data rows, header excluded
  }
}

TEST(Physio, MissingSidecarRejected) {
  TempDir dir("physio_nometa");
  spit(dir / "b.csv", "t,value\n0,1\n");
  EXPECT_ANY_THROW(read_physio_csv(dir / "b.csv", dir / "b.json"));
}

TEST(Physio, WriteReadRoundTripIsExact) {
  TempDir dir("physio_rt");
  std::mt19937_64 rng(1);
  const auto v = oracle::random_vector(rng, 500);
  const PhysioSignal s{PhysioKind::respiration, "p9", Lighting::studio, Signal1D(v, 32.0)};
  write_physio_csv(s, dir / "r.csv", dir / "r.json");
  const PhysioSignal back = read_physio_csv(dir / "r.csv", dir / "r.json");
  EXPECT_EQ(back.signal.values(), v);
  EXPECT_EQ(back.fs(), 32.0);
  EXPECT_EQ(back.kind, PhysioKind::respiration);
  EXPECT_EQ(back.subject_id, "p9");
}

TEST(RoiTrack, SingleBoxCoversAllFrames) {
  std::istringstream in("frame,x,y,w,h\n0,100,80,200,240\n");
  const RoiTrack t = parse_roi_track(in, FrameGeometry{640, 480});
  EXPECT_TRUE(t.covers_from_start());
  for (std::size_t f : {0u, 1u, 500u, 1199u}) EXPECT_EQ(*t.at(f).box, (Box{100, 80, 200, 240}));
}

TEST(RoiTrack, InheritanceUsesMostRecentRow) {
  std::istringstream in("0,1,1,10,10\n5,2,2,10,10\n");
  const RoiTrack t = parse_roi_track(in);
  EXPECT_EQ(t.at(4).box->x, 1);
  EXPECT_EQ(t.at(5).box->x, 2);
  EXPECT_EQ(t.at(100).box->x, 2);
}

TEST(RoiTrack, NegativeWidthRejected) {
  std::istringstream in("0,100,80,-200,240\n");
  EXPECT_THROW(parse_roi_track(in), FormatError);
}

TEST(RoiTrack, NinePointPolygon) {
  std::ostringstream row;
  row << 0;
  for (int i = 0; i < 9; ++i) {
    const double a = 2.0 * std::numbers::pi * i / 9.0;
    row << ',' << 50 + 20 * std::cos(a) << ',' << 50 + 20 * std::sin(a);
  }
  std::istringstream in(row.str() + "\n");
  const RoiTrack t = parse_roi_track(in);
  ASSERT_EQ(t.entries().size(), 1u);
  EXPECT_TRUE(t.at(0).is_polygon());
  EXPECT_EQ(t.at(0).landmarks.size(), 9u);
}

TEST(RoiTrack, OutOfFrameRejected) {
  std::istringstream in("0,600,80,200,240\n");
  EXPECT_THROW(parse_roi_track(in, FrameGeometry{640, 480}), FormatError);
}

TEST(RoiTrack, WriteReadRoundTrip) {
  TempDir dir("roi_rt");
  RoiEntry a{0, Box{1, 2, 3, 4}, {}};
  RoiEntry b{7, Box{5, 6, 7, 8}, {}};
  write_roi_track(RoiTrack({a, b}), dir / "r.csv");
  const RoiTrack back = read_roi_track(dir / "r.csv");
  ASSERT_EQ(back.entries().size(), 2u);
  EXPECT_EQ(*back.entries()[1].box, (Box{5, 6, 7, 8}));
  EXPECT_EQ(back.entries()[1].frame, 7u);
}

TEST(Protocol, LargeSplitCounts) {
  std::istringstream a(protocol_text(96, 64, "any"));
  const ProtocolIndex p1 = parse_protocol(a, "hci");
  EXPECT_EQ(p1.entries().size(), 160u);
  EXPECT_EQ(p1.split(Split::train).size(), 96u);
  std::istringstream b(protocol_text(48, 32, "studio"));
  const ProtocolIndex p2 = parse_protocol(b, "cohface");
  EXPECT_EQ(p2.split(Split::test).size(), 32u);
  EXPECT_EQ(p2.entries().front().condition, Condition::studio);
}

TEST(Protocol, RejectsUnknownSplitAndDuplicates) {
  std::istringstream a("s1,train,any\ns2,validation,any\n");
  EXPECT_THROW(parse_protocol(a, "x"), FormatError);
  std::istringstream b("s1,train,any\ns2,test,any\ns1,test,any\n");
  EXPECT_THROW(parse_protocol(b, "x"), FormatError);
}

TEST(Protocol, RejectsSubjectInBothSplits) {
  std::istringstream in("s1,train,any,alice\ns2,test,any,alice\n");
  EXPECT_THROW(parse_protocol(in, "x"), FormatError);
}

TEST(Protocol, WriteLoadRoundTrip) {
  TempDir dir("proto_rt");
  const ProtocolIndex p("demo", {{"a", Split::train, Condition::studio, "s1"}, {"b", Split::test, Condition::natural, std::nullopt}});
  write_protocol(p, dir / "demo.csv");
  const ProtocolIndex back = load_protocol(dir / "demo.csv");
  ASSERT_EQ(back.entries().size(), 2u);
  EXPECT_EQ(back.entries()[0].subject_id, std::optional<std::string>("s1"));
  EXPECT_EQ(back.entries()[1].condition, Condition::natural);
  EXPECT_FALSE(back.entries()[1].subject_id.has_value());
}
