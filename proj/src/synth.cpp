#include "rppg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "rppg/errors.hpp"

namespace rppg {

namespace fs = std::filesystem;

namespace {

// Low-discrepancy step sizes: inverse powers of the root of x^13 = x + 1.
// Each channel sums two fields with their own steps, giving a triangular
// dither in (-1, 1). It still spreads pixels whose value sits exactly on an
// integer level, and the channels stay independent so skin pixels keep full
// rank in RGB space.
constexpr double kHarmonious12 = 1.0570505752212285;

double dither_field(int x, int y, int k) {
  const double v = 0.5 + x * std::pow(kHarmonious12, -(2 * k + 1)) + y * std::pow(kHarmonious12, -(2 * k + 2));
  return v - std::floor(v) - 0.5;
}

double dither_offset(int x, int y, int c) { return dither_field(x, y, 2 * c) + dither_field(x, y, 2 * c + 1); }

}  // namespace

Box SynthConfig::resolved_skin_rect() const {
  if (skin_rect) return *skin_rect;
  return Box{width / 4, height / 4, width / 2, height / 2};
}

std::size_t SynthConfig::frame_count() const {
  return static_cast<std::size_t>(std::llround(duration_s * fps.value()));
}

void SynthConfig::validate() const {
  if (width <= 0 || height <= 0) throw InvalidArgument("synth: frame size must be positive");
  if (fps.num <= 0 || fps.den <= 0) throw InvalidArgument("synth: fps must be positive");
  if (!(duration_s > 0.0) || frame_count() == 0) throw InvalidArgument("synth: duration must yield at least one frame");
  if (!(hr_bpm >= 40.0 && hr_bpm <= 240.0)) throw InvalidArgument("synth: hr_bpm must lie in [40, 240]");
  if (!(noise_sd >= 0.0) || !(bvp_noise_sd >= 0.0)) throw InvalidArgument("synth: noise must be non-negative");
  if (!(bvp_fs > 0.0)) throw InvalidArgument("synth: bvp_fs must be positive");
  if (!(drift_hz >= 0.0) || !(drift_amplitude >= 0.0)) throw InvalidArgument("synth: drift must be non-negative");
  for (double a : pulse_amplitude) {
    if (!(a >= 0.0)) throw InvalidArgument("synth: pulse amplitudes must be non-negative");
  }
  const Box r = resolved_skin_rect();
  if (r.w <= 0 || r.h <= 0 || r.x < 0 || r.y < 0 || r.x + r.w > width || r.y + r.h > height)
    throw InvalidArgument("synth: skin_rect must lie inside the frame");
  if (face_margin < 0) throw InvalidArgument("synth: face_margin must be non-negative");
}

SynthBundle generate(const SynthConfig& config) {
  config.validate();

  const std::size_t frames = config.frame_count();
  const double fps = config.fps.value();
  const double pulse_hz = config.hr_bpm / 60.0;
  const Box skin = config.resolved_skin_rect();
  const auto w = static_cast<std::size_t>(config.width);
  const auto h = static_cast<std::size_t>(config.height);
  const std::size_t frame_bytes = w * h * 3;

  std::vector<double> dither(w * h * 3, 0.0);
  if (config.ordered_dither) {
    for (int y = 0; y < config.height; ++y)
      for (int x = 0; x < config.width; ++x)
        for (int c = 0; c < 3; ++c)
          dither[(static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)) * 3 + static_cast<std::size_t>(c)] =
              dither_offset(x, y, c);
  }

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::uint8_t> data(frames * frame_bytes);
  std::size_t clipped = 0;

  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / fps;
    const double pulse = std::sin(2.0 * std::numbers::pi * pulse_hz * t);
    const double drift = config.drift_amplitude * std::sin(2.0 * std::numbers::pi * config.drift_hz * t);
    std::array<double, 3> skin_level{};
    for (int c = 0; c < 3; ++c) skin_level[c] = config.skin_base_rgb[c] + config.pulse_amplitude[c] * pulse + drift;
    const double bg_level = config.background_gray + drift;

    std::uint8_t* out = data.data() + f * frame_bytes;
    for (int y = 0; y < config.height; ++y) {
      const bool skin_row = y >= skin.y && y < skin.y + skin.h;
      for (int x = 0; x < config.width; ++x) {
        const bool is_skin = skin_row && x >= skin.x && x < skin.x + skin.w;
        const std::size_t p = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
        for (int c = 0; c < 3; ++c) {
          double v = is_skin ? skin_level[c] : bg_level;
          if (config.noise_sd > 0.0) v += config.noise_sd * noise(rng);
          const double q = std::floor(v + dither[p * 3 + static_cast<std::size_t>(c)] + 0.5);
          if (q < 0.0 || q > 255.0) ++clipped;
          out[p * 3 + static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
        }
      }
    }
  }

  if (static_cast<double>(clipped) > 0.01 * static_cast<double>(data.size()))
    throw InvalidArgument("synth: " + std::to_string(clipped) + " of " + std::to_string(data.size()) +
                          " samples clip; lower the amplitudes or move the base color");

  const auto bvp_len = static_cast<std::size_t>(std::llround(config.duration_s * config.bvp_fs));
  std::vector<double> bvp(std::max<std::size_t>(bvp_len, 1));
  std::mt19937_64 bvp_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t k = 0; k < bvp.size(); ++k) {
    bvp[k] = std::sin(2.0 * std::numbers::pi * pulse_hz * static_cast<double>(k) / config.bvp_fs);
    if (config.bvp_noise_sd > 0.0) bvp[k] += config.bvp_noise_sd * noise(bvp_rng);
  }

  const int fx0 = std::max(0, skin.x - config.face_margin);
  const int fy0 = std::max(0, skin.y - config.face_margin);
  const int fx1 = std::min(config.width, skin.x + skin.w + config.face_margin);
  const int fy1 = std::min(config.height, skin.y + skin.h + config.face_margin);
  RoiEntry face_entry;
  face_entry.box = Box{fx0, fy0, fx1 - fx0, fy1 - fy0};

  RoiEntry poly;
  const double x0 = skin.x, y0 = skin.y, x1 = skin.x + skin.w, y1 = skin.y + skin.h;
  poly.landmarks = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};

  return SynthBundle{
      FrameSequence(config.width, config.height, config.fps, frames, std::move(data), config.sequence_id),
      PhysioSignal{PhysioKind::bvp, config.subject_id, config.lighting, Signal1D(std::move(bvp), config.bvp_fs)},
      RoiTrack({face_entry}),
      RoiTrack({poly}),
      config.hr_bpm,
  };
}

std::vector<double> beat_times(const SynthConfig& config) {
  const double f = config.hr_bpm / 60.0;
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double t = (k + 0.25) / f;
    if (t >= config.duration_s) break;
    out.push_back(t);
  }
  return out;
}

BundlePaths BundlePaths::in(const fs::path& dir) {
  return BundlePaths{dir / "seq.rvid", dir / "roi.csv", dir / "landmarks.csv",
                     dir / "bvp.csv",  dir / "bvp.json", dir / "hr.json"};
}

void write_bundle(const SynthBundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  const auto paths = BundlePaths::in(dir);
  write_rvid(bundle.video, paths.video);
  write_roi_track(bundle.face, paths.face_roi);
  write_roi_track(bundle.landmarks, paths.landmarks);
  write_physio_csv(bundle.bvp, paths.bvp_csv, paths.bvp_meta);
  std::ofstream out(paths.truth, std::ios::trunc);
  if (!out) throw IoError("cannot write " + paths.truth.string());
  out << nlohmann::json{{"hr_bpm", bundle.hr_bpm}}.dump() << '\n';
}

double read_truth_hr(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in).at("hr_bpm").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<SynthConfig> dataset_configs(const SynthConfig& base, std::size_t count, double hr_min, double hr_max,
                                         std::uint64_t seed) {
  if (!(hr_min <= hr_max)) throw InvalidArgument("synth: hr_min must not exceed hr_max");
  std::mt19937_64 rng(seed);
  std::vector<SynthConfig> out;
  const int digits = count > 100 ? static_cast<int>(std::to_string(count - 1).size()) : 2;
  for (std::size_t i = 0; i < count; ++i) {
    // Explicit 53-bit mantissa draw: the standard distributions are not
    // specified bit-for-bit across library implementations.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    std::string num = std::to_string(i);
    num.insert(0, static_cast<std::size_t>(std::max(0, digits - static_cast<int>(num.size()))), '0');
    SynthConfig c = base;
    c.hr_bpm = hr_min + u * (hr_max - hr_min);
    c.seed = rng();
    c.sequence_id = "s" + num;
    c.subject_id = "subject" + num;
    out.push_back(std::move(c));
  }
  return out;
}

ProtocolIndex dataset_protocol(const std::vector<SynthConfig>& configs, std::size_t train_count, std::string name) {
  std::vector<ProtocolEntry> entries;
  for (std::size_t i = 0; i < configs.size(); ++i)
    entries.push_back({configs[i].sequence_id, i < train_count ? Split::train : Split::test,
                       configs[i].lighting == Lighting::studio ? Condition::studio : Condition::natural,
                       configs[i].subject_id});
  return ProtocolIndex(std::move(name), std::move(entries));
}

}  // namespace rppg
