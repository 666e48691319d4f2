#include "rppg/media_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rppg/errors.hpp"
#include "rppg/text.hpp"

namespace rppg {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kRvidMagic = "RVID1";
constexpr std::size_t kMaxHeaderBytes = 256;
constexpr int kMaxDimension = 1 << 16;

std::ifstream open_input(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::int64_t header_int(std::string_view tok, std::string_view what) {
  auto v = parse_integer(tok);
  if (!v || *v <= 0 || tok.empty() || tok.front() == '+' || tok.front() == ' ')
    throw FormatError("RVID header: invalid " + std::string(what) + " '" + std::string(tok) + "'", 0);
  return *v;
}

}  // namespace

// -- FrameSequence -----------------------------------------------------------

FrameSequence::FrameSequence(int width, int height, Rational fps, std::size_t frame_count,
                             std::vector<std::uint8_t> data, std::string sequence_id)
    : width_(width),
      height_(height),
      fps_(fps),
      frame_count_(frame_count),
      data_(std::move(data)),
      sequence_id_(std::move(sequence_id)) {
  if (width_ <= 0 || height_ <= 0) throw InvalidArgument("frame dimensions must be positive");
  if (fps_.num <= 0 || fps_.den <= 0) throw InvalidArgument("frame rate must be positive");
  if (frame_count_ == 0) throw InvalidArgument("a frame sequence needs at least one frame");
  if (data_.size() != frame_count_ * frame_bytes())
    throw InvalidArgument("frame data size does not match width x height x 3 x frames");
}

FrameView FrameSequence::frame(std::size_t i) const {
  if (i >= frame_count_) throw InvalidArgument("frame index " + std::to_string(i) + " out of range");
  return FrameView{std::span<const std::uint8_t>(data_).subspan(i * frame_bytes(), frame_bytes()), width_, height_};
}

// -- RVID --------------------------------------------------------------------

RvidHeader parse_rvid_header(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  const auto tokens = split_fields(line, ' ');
  if (tokens.empty() || tokens[0] != kRvidMagic) throw FormatError("bad RVID magic", 0);
  if (tokens.size() != 5) throw FormatError("RVID header must have 5 space-separated fields", 0);

  RvidHeader h;
  const auto w = header_int(tokens[1], "width");
  const auto ht = header_int(tokens[2], "height");
  if (w > kMaxDimension || ht > kMaxDimension) throw FormatError("RVID header: dimension overflow", 0);
  h.width = static_cast<int>(w);
  h.height = static_cast<int>(ht);

  const auto slash = tokens[3].find('/');
  if (slash == std::string_view::npos) throw FormatError("RVID header: frame rate must be num/den", 0);
  h.fps.num = header_int(tokens[3].substr(0, slash), "fps numerator");
  h.fps.den = header_int(tokens[3].substr(slash + 1), "fps denominator");

  const auto frames = header_int(tokens[4], "frame count");
  const std::uint64_t frame_bytes = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(ht) * 3;
  if (static_cast<std::uint64_t>(frames) > std::numeric_limits<std::uint64_t>::max() / frame_bytes ||
      static_cast<std::uint64_t>(frames) * frame_bytes > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
    throw FormatError("RVID header: payload size overflow", 0);
  h.frame_count = static_cast<std::uint64_t>(frames);
  h.header_bytes = line.size() + 1;
  return h;
}

std::string format_rvid_header(int width, int height, Rational fps, std::uint64_t frame_count) {
  std::ostringstream os;
  os << kRvidMagic << ' ' << width << ' ' << height << ' ' << fps.num << '/' << fps.den << ' ' << frame_count << '\n';
  return os.str();
}

FrameSequence read_rvid(const fs::path& path) {
  auto in = open_input(path, std::ios::in | std::ios::binary);
  std::string line;
  char c = 0;
  while (line.size() < kMaxHeaderBytes && in.get(c) && c != '\n') line.push_back(c);
  if (c != '\n') {
    if (line.rfind(kRvidMagic, 0) != 0) throw FormatError(path.string() + ": bad RVID magic", 0);
    throw FormatError(path.string() + ": unterminated RVID header", line.size());
  }

  RvidHeader h;
  try {
    h = parse_rvid_header(line);
  } catch (const FormatError& e) {
    throw e.with_context(path.string());
  }

  const std::uint64_t expected = h.payload_bytes();
  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  const std::uint64_t available = file_size - h.header_bytes;
  if (available < expected) {
    throw FormatError(path.string() + ": truncated payload, expected " + std::to_string(expected) +
                          " bytes of frame data, found " + std::to_string(available),
                      file_size);
  }
  if (available > expected)
    throw FormatError(path.string() + ": trailing bytes after last frame", h.header_bytes + expected);

  std::vector<std::uint8_t> data(static_cast<std::size_t>(expected));
  in.seekg(static_cast<std::streamoff>(h.header_bytes));
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(expected));
  if (!in) throw IoError("read failed for " + path.string());

  return FrameSequence(h.width, h.height, h.fps, static_cast<std::size_t>(h.frame_count), std::move(data),
                       path.stem().string());
}

void write_rvid(const FrameSequence& seq, const fs::path& path) {
  auto out = open_output(path, std::ios::out | std::ios::binary);
  const std::string header = format_rvid_header(seq.width(), seq.height(), seq.fps(), seq.frame_count());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(seq.data().data()), static_cast<std::streamsize>(seq.data().size()));
  if (!out) throw IoError("write failed for " + path.string());
}

// -- physio ------------------------------------------------------------------

std::string_view to_string(PhysioKind k) { return k == PhysioKind::bvp ? "bvp" : "respiration"; }
std::string_view to_string(Lighting l) { return l == Lighting::studio ? "studio" : "natural"; }

PhysioSignal read_physio_csv(const fs::path& csv_path, const fs::path& meta_path) {
  if (!fs::exists(meta_path)) throw FormatError("missing physio sidecar " + meta_path.string());

  nlohmann::json meta;
  try {
    auto min = open_input(meta_path);
    meta = nlohmann::json::parse(min);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }

  PhysioSignal out{PhysioKind::bvp, {}, Lighting::studio, Signal1D({0.0}, 1.0)};
  double fs_hz = 0.0;
  try {
    fs_hz = meta.at("sample_rate_hz").get<double>();
    out.subject_id = meta.at("subject_id").get<std::string>();
    const auto lighting = meta.at("lighting").get<std::string>();
    const auto type = meta.at("signal_type").get<std::string>();
    if (lighting == "studio") out.lighting = Lighting::studio;
    else if (lighting == "natural") out.lighting = Lighting::natural;
    else throw FormatError(meta_path.string() + ": unknown lighting '" + lighting + "'");
    if (type == "bvp") out.kind = PhysioKind::bvp;
    else if (type == "respiration") out.kind = PhysioKind::respiration;
    else throw FormatError(meta_path.string() + ": unknown signal_type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
  if (!std::isfinite(fs_hz) || fs_hz <= 0.0) throw FormatError(meta_path.string() + ": sample_rate_hz must be > 0");

  auto in = open_input(csv_path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "t,value")
    throw FormatError(csv_path.string() + ": expected header 't,value'", std::nullopt, 0);

  std::vector<double> samples;
  double prev_t = -std::numeric_limits<double>::infinity();
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2) throw FormatError(csv_path.string() + ": expected 2 fields", std::nullopt, row);
    const auto t = parse_double(fields[0]);
    const auto v = parse_double(fields[1]);
    if (!t || !v) throw FormatError(csv_path.string() + ": unparseable number", std::nullopt, row);
    if (!std::isfinite(*t) || !std::isfinite(*v))
      throw FormatError(csv_path.string() + ": non-finite value", std::nullopt, row);
    if (!(*t > prev_t))
      throw FormatError(csv_path.string() + ": timestamps not strictly increasing", std::nullopt, row);
    prev_t = *t;
    samples.push_back(*v);
  }
  if (samples.empty()) throw FormatError(csv_path.string() + ": no data rows");
  out.signal = Signal1D(std::move(samples), fs_hz);
  return out;
}

void write_physio_csv(const PhysioSignal& sig, const fs::path& csv_path, const fs::path& meta_path) {
  {
    auto out = open_output(csv_path);
    out << "t,value\n";
    for (std::size_t i = 0; i < sig.signal.size(); ++i)
      out << format_number(static_cast<double>(i) / sig.fs()) << ',' << format_number(sig.signal[i]) << '\n';
    if (!out) throw IoError("write failed for " + csv_path.string());
  }
  nlohmann::json meta = {{"subject_id", sig.subject_id},
                         {"lighting", std::string(to_string(sig.lighting))},
                         {"sample_rate_hz", sig.fs()},
                         {"signal_type", std::string(to_string(sig.kind))}};
  auto out = open_output(meta_path);
  out << meta.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + meta_path.string());
}

// -- ROI ---------------------------------------------------------------------

Box RoiEntry::bounds() const {
  if (box) return *box;
  double min_x = landmarks.front().x, max_x = min_x;
  double min_y = landmarks.front().y, max_y = min_y;
  for (const auto& p : landmarks) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  // Pixel (px, py) is sampled at its center (px + 0.5, py + 0.5).
  const int x0 = static_cast<int>(std::ceil(min_x - 0.5));
  const int y0 = static_cast<int>(std::ceil(min_y - 0.5));
  const int x1 = static_cast<int>(std::floor(max_x - 0.5));
  const int y1 = static_cast<int>(std::floor(max_y - 0.5));
  return Box{x0, y0, std::max(0, x1 - x0 + 1), std::max(0, y1 - y0 + 1)};
}

RoiTrack::RoiTrack(std::vector<RoiEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (i > 0 && e.frame <= entries_[i - 1].frame)
      throw InvalidArgument("ROI frame indices must be strictly increasing");
    if (e.box) {
      if (e.box->w <= 0 || e.box->h <= 0) throw InvalidArgument("ROI box must have positive size");
    } else if (e.landmarks.size() < 4) {
      throw InvalidArgument("ROI polygon needs at least 4 landmarks");
    }
  }
}

std::size_t RoiTrack::entry_index(std::size_t frame) const {
  auto it = std::upper_bound(entries_.begin(), entries_.end(), frame,
                             [](std::size_t f, const RoiEntry& e) { return f < e.frame; });
  if (it == entries_.begin()) throw InvalidArgument("no ROI entry at or before frame " + std::to_string(frame));
  return static_cast<std::size_t>(std::distance(entries_.begin(), it) - 1);
}

const RoiEntry& RoiTrack::at(std::size_t frame) const { return entries_[entry_index(frame)]; }

bool RoiTrack::has_polygons() const {
  return !entries_.empty() && std::all_of(entries_.begin(), entries_.end(), [](const RoiEntry& e) { return e.is_polygon(); });
}

void RoiTrack::check_bounds(int width, int height) const {
  for (const auto& e : entries_) {
    if (e.box) {
      const Box& b = *e.box;
      if (b.x < 0 || b.y < 0 || b.x + b.w > width || b.y + b.h > height)
        throw FormatError("ROI box at frame " + std::to_string(e.frame) + " lies outside the " +
                          std::to_string(width) + "x" + std::to_string(height) + " frame");
    } else {
      for (const auto& p : e.landmarks) {
        if (p.x < 0 || p.y < 0 || p.x > width || p.y > height)
          throw FormatError("ROI landmark at frame " + std::to_string(e.frame) + " lies outside the frame");
      }
    }
  }
}

RoiTrack parse_roi_track(std::istream& in, std::optional<FrameGeometry> geometry) {
  std::vector<RoiEntry> entries;
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++row;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_fields(t);
    if (first && !parse_integer(fields[0])) {  // header
      first = false;
      continue;
    }
    first = false;

    RoiEntry e;
    const auto frame = parse_integer(fields[0]);
    if (!frame || *frame < 0) throw FormatError("ROI: invalid frame index", std::nullopt, row);
    e.frame = static_cast<std::size_t>(*frame);
    if (fields.size() == 5) {
      long long v[4];
      for (int k = 0; k < 4; ++k) {
        auto p = parse_integer(fields[static_cast<std::size_t>(k + 1)]);
        if (!p) throw FormatError("ROI: box fields must be integers", std::nullopt, row);
        v[k] = *p;
      }
      if (v[2] <= 0 || v[3] <= 0) throw FormatError("ROI: box width and height must be positive", std::nullopt, row);
      e.box = Box{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
    } else if (fields.size() >= 9 && fields.size() % 2 == 1) {
      for (std::size_t k = 1; k < fields.size(); k += 2) {
        auto x = parse_double(fields[k]);
        auto y = parse_double(fields[k + 1]);
        if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y))
          throw FormatError("ROI: invalid landmark coordinate", std::nullopt, row);
        e.landmarks.push_back({*x, *y});
      }
    } else {
      throw FormatError("ROI: expected frame,x,y,w,h or frame followed by >= 4 landmark pairs", std::nullopt, row);
    }
    if (!entries.empty() && e.frame <= entries.back().frame)
      throw FormatError("ROI: frame indices must be strictly increasing", std::nullopt, row);
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw FormatError("ROI: no entries");
  RoiTrack track(std::move(entries));
  if (geometry) track.check_bounds(geometry->width, geometry->height);
  return track;
}

RoiTrack read_roi_track(const fs::path& path, std::optional<FrameGeometry> geometry) {
  auto in = open_input(path);
  try {
    return parse_roi_track(in, geometry);
  } catch (const FormatError& e) {
    throw e.with_context(path.string());
  }
}

void write_roi_track(const RoiTrack& track, const fs::path& path) {
  auto out = open_output(path);
  const bool polygons = track.has_polygons();
  out << (polygons ? "frame,x1,y1,...\n" : "frame,x,y,w,h\n");
  for (const auto& e : track.entries()) {
    out << e.frame;
    if (e.box) {
      out << ',' << e.box->x << ',' << e.box->y << ',' << e.box->w << ',' << e.box->h;
    } else {
      for (const auto& p : e.landmarks) out << ',' << format_number(p.x) << ',' << format_number(p.y);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

// -- protocols ---------------------------------------------------------------

std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::studio: return "studio";
    case Condition::natural: return "natural";
    case Condition::any: return "any";
  }
  return "any";
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  return std::nullopt;
}

ProtocolIndex::ProtocolIndex(std::string name, std::vector<ProtocolEntry> entries)
    : name_(std::move(name)), entries_(std::move(entries)) {
  std::set<std::string> ids;
  std::set<std::string> train_subjects, test_subjects;
  bool has_train = false, has_test = false;
  for (const auto& e : entries_) {
    if (!ids.insert(e.sequence_id).second) throw FormatError("protocol: duplicate sequence id '" + e.sequence_id + "'");
    (e.split == Split::train ? has_train : has_test) = true;
    if (e.subject_id) (e.split == Split::train ? train_subjects : test_subjects).insert(*e.subject_id);
  }
  if (!has_train || !has_test) throw FormatError("protocol: both train and test splits must be non-empty");
  for (const auto& s : train_subjects) {
    if (test_subjects.count(s)) throw FormatError("protocol: subject '" + s + "' appears in both splits");
  }
}

std::vector<ProtocolEntry> ProtocolIndex::split(Split s) const {
  std::vector<ProtocolEntry> out;
  std::copy_if(entries_.begin(), entries_.end(), std::back_inserter(out),
               [s](const ProtocolEntry& e) { return e.split == s; });
  return out;
}

ProtocolIndex parse_protocol(std::istream& in, std::string name) {
  std::vector<ProtocolEntry> entries;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_fields(t);
    if (trim(fields[0]) == "sequence_id") continue;
    if (fields.size() != 3 && fields.size() != 4)
      throw FormatError("protocol: expected sequence_id,split,condition[,subject_id]", std::nullopt, row);

    ProtocolEntry e;
    e.sequence_id = std::string(trim(fields[0]));
    if (e.sequence_id.empty()) throw FormatError("protocol: empty sequence id", std::nullopt, row);
    const auto split = parse_split(trim(fields[1]));
    if (!split) throw FormatError("protocol: unknown split '" + std::string(trim(fields[1])) + "'", std::nullopt, row);
    e.split = *split;
    const auto cond = trim(fields[2]);
    if (cond == "studio") e.condition = Condition::studio;
    else if (cond == "natural") e.condition = Condition::natural;
    else if (cond == "any") e.condition = Condition::any;
    else throw FormatError("protocol: unknown condition '" + std::string(cond) + "'", std::nullopt, row);
    if (fields.size() == 4 && !trim(fields[3]).empty()) e.subject_id = std::string(trim(fields[3]));
    entries.push_back(std::move(e));
  }
  return ProtocolIndex(std::move(name), std::move(entries));
}

ProtocolIndex load_protocol(const fs::path& path) {
  auto in = open_input(path);
  try {
    return parse_protocol(in, path.stem().string());
  } catch (const FormatError& e) {
    throw e.with_context(path.string());
  }
}

void write_protocol(const ProtocolIndex& protocol, const fs::path& path) {
  auto out = open_output(path);
  out << "sequence_id,split,condition,subject_id\n";
  for (const auto& e : protocol.entries())
    out << e.sequence_id << ',' << to_string(e.split) << ',' << to_string(e.condition) << ','
        << e.subject_id.value_or("") << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace rppg
