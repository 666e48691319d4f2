#pragma once

// Video, physiological signal, ROI and protocol files.
//
// RVID container: one ASCII header line
//   RVID1 <width> <height> <fps_num>/<fps_den> <nframes>\n
// followed by nframes * width * height * 3 bytes of row-major, interleaved
// 8-bit RGB.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rppg/signal.hpp"

namespace rppg {

struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

/// Read-only view of one RGB24 frame.
struct FrameView {
  std::span<const std::uint8_t> pixels;
  int width = 0;
  int height = 0;

  Rgb at(int x, int y) const {
    const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
};

class FrameSequence {
 public:
  /// `data` holds all frames back to back; its size must be
  /// frame_count * width * height * 3.
  FrameSequence(int width, int height, Rational fps, std::size_t frame_count,
                std::vector<std::uint8_t> data, std::string sequence_id = {});

  int width() const { return width_; }
  int height() const { return height_; }
  Rational fps() const { return fps_; }
  double fps_hz() const { return fps_.value(); }
  std::size_t frame_count() const { return frame_count_; }
  std::size_t frame_bytes() const { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_) * 3; }

  FrameView frame(std::size_t i) const;
  const std::vector<std::uint8_t>& data() const { return data_; }

  const std::string& sequence_id() const { return sequence_id_; }
  void set_sequence_id(std::string id) { sequence_id_ = std::move(id); }

 private:
  int width_;
  int height_;
  Rational fps_;
  std::size_t frame_count_;
  std::vector<std::uint8_t> data_;
  std::string sequence_id_;
};

struct RvidHeader {
  int width = 0;
  int height = 0;
  Rational fps;
  std::uint64_t frame_count = 0;
  std::size_t header_bytes = 0;  ///< length of the header line including '\n'

  std::uint64_t payload_bytes() const {
    return frame_count * static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height) * 3;
  }
};

/// Parses the header line (with or without its trailing newline).
RvidHeader parse_rvid_header(std::string_view line);
std::string format_rvid_header(int width, int height, Rational fps, std::uint64_t frame_count);

FrameSequence read_rvid(const std::filesystem::path& path);
void write_rvid(const FrameSequence& seq, const std::filesystem::path& path);

// -- physiological signals ---------------------------------------------------

enum class PhysioKind { bvp, respiration };
enum class Lighting { studio, natural };

std::string_view to_string(PhysioKind k);
std::string_view to_string(Lighting l);

struct PhysioSignal {
  PhysioKind kind = PhysioKind::bvp;
  std::string subject_id;
  Lighting lighting = Lighting::studio;
  Signal1D signal;

  double fs() const { return signal.fs(); }
};

/// Reads a `t,value` CSV plus its JSON sidecar (`subject_id`, `lighting`,
/// `sample_rate_hz`, `signal_type`). Error rows count data rows from 1.
PhysioSignal read_physio_csv(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path);
void write_physio_csv(const PhysioSignal& sig, const std::filesystem::path& csv_path,
                      const std::filesystem::path& meta_path);

// -- regions of interest -----------------------------------------------------

struct Box {
  int x = 0, y = 0, w = 0, h = 0;
  bool operator==(const Box&) const = default;
  long long area() const { return static_cast<long long>(w) * h; }
};

struct PointF {
  double x = 0.0, y = 0.0;
  bool operator==(const PointF&) const = default;
};

/// One ROI row: either an axis-aligned box or a landmark polygon.
struct RoiEntry {
  std::size_t frame = 0;
  std::optional<Box> box;
  std::vector<PointF> landmarks;

  bool is_polygon() const { return !box.has_value(); }
  /// The box itself, or the pixels whose centers fall within the landmark
  /// extent.
  Box bounds() const;
};

class RoiTrack {
 public:
  RoiTrack() = default;
  explicit RoiTrack(std::vector<RoiEntry> entries);

  const std::vector<RoiEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// Entry for `frame`: the most recent entry at or before it.
  const RoiEntry& at(std::size_t frame) const;
  /// Index into entries() of the entry used for `frame`.
  std::size_t entry_index(std::size_t frame) const;
  bool covers_from_start() const { return !entries_.empty() && entries_.front().frame == 0; }
  bool has_polygons() const;

  /// Throws FormatError if a box or landmark lies outside a width x height frame.
  void check_bounds(int width, int height) const;

 private:
  std::vector<RoiEntry> entries_;
};

struct FrameGeometry {
  int width = 0;
  int height = 0;
};

/// Rows are `frame,x,y,w,h` or `frame,x1,y1,x2,y2,...` (at least 4 points).
/// A leading header line is skipped.
RoiTrack read_roi_track(const std::filesystem::path& path, std::optional<FrameGeometry> geometry = std::nullopt);
RoiTrack parse_roi_track(std::istream& in, std::optional<FrameGeometry> geometry = std::nullopt);
void write_roi_track(const RoiTrack& track, const std::filesystem::path& path);

// -- protocols ---------------------------------------------------------------

enum class Split { train, test };
enum class Condition { studio, natural, any };

std::string_view to_string(Split s);
std::string_view to_string(Condition c);
std::optional<Split> parse_split(std::string_view s);

struct ProtocolEntry {
  std::string sequence_id;
  Split split = Split::train;
  Condition condition = Condition::any;
  std::optional<std::string> subject_id;
};

class ProtocolIndex {
 public:
  ProtocolIndex(std::string name, std::vector<ProtocolEntry> entries);

  const std::string& name() const { return name_; }
  const std::vector<ProtocolEntry>& entries() const { return entries_; }
  std::vector<ProtocolEntry> split(Split s) const;

 private:
  std::string name_;
  std::vector<ProtocolEntry> entries_;
};

/// Lines are `sequence_id,split,condition[,subject_id]`; blank lines,
/// `#` comments and a header line starting with `sequence_id` are skipped.
ProtocolIndex load_protocol(const std::filesystem::path& path);
ProtocolIndex parse_protocol(std::istream& in, std::string name);
void write_protocol(const ProtocolIndex& protocol, const std::filesystem::path& path);

}  // namespace rppg
