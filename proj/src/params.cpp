#include "rppg/params.hpp"

#include <functional>

#include "rppg/errors.hpp"
#include "rppg/synth.hpp"
#include "rppg/text.hpp"

namespace rppg {

namespace fs = std::filesystem;

namespace {

struct Field {
  std::string key;
  std::function<std::string(const AlgorithmParams&)> get;
  std::function<void(AlgorithmParams&, std::string_view)> set;
};

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw InvalidArgument("invalid value '" + std::string(value) + "' for parameter " + std::string(key));
}

double as_double(std::string_view key, std::string_view v) {
  const auto d = parse_double(v);
  if (!d) bad_value(key, v);
  return *d;
}

long long as_integer(std::string_view key, std::string_view v) {
  const auto i = parse_integer(v);
  if (!i) bad_value(key, v);
  return *i;
}

std::size_t as_count(std::string_view key, std::string_view v) {
  const long long i = as_integer(key, v);
  if (i < 0) bad_value(key, v);
  return static_cast<std::size_t>(i);
}

bool as_bool(std::string_view key, std::string_view v) {
  const auto t = trim(v);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  bad_value(key, v);
}

RoiStrategy as_strategy(std::string_view key, std::string_view v) {
  const auto s = parse_strategy(trim(v));
  if (!s) bad_value(key, v);
  return *s;
}

std::string fmt(double v) { return format_number(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(RoiStrategy s) { return std::string(to_string(s)); }

#define RPPG_FIELD(KEY, MEMBER, CONVERT)                                             \
  Field {                                                                            \
    KEY, [](const AlgorithmParams& p) { return fmt(p.MEMBER); },                     \
        [](AlgorithmParams& p, std::string_view v) { p.MEMBER = CONVERT(KEY, v); } \
  }

int as_int(std::string_view key, std::string_view v) {
  const long long i = as_integer(key, v);
  if (i < INT32_MIN || i > INT32_MAX) bad_value(key, v);
  return static_cast<int>(i);
}

const std::vector<Field>& chrom_fields() {
  static const std::vector<Field> f{
      RPPG_FIELD("chrom.window_s", chrom.window_s, as_double),
      RPPG_FIELD("chrom.band_lo", chrom.band.lo, as_double),
      RPPG_FIELD("chrom.band_hi", chrom.band.hi, as_double),
      RPPG_FIELD("chrom.filter_taps", chrom.filter_taps, as_int),
      RPPG_FIELD("chrom.strategy", chrom.strategy, as_strategy),
      RPPG_FIELD("chrom.skin_tau", chrom.skin_tau, as_double),
  };
  return f;
}

const std::vector<Field>& licvpr_fields() {
  static const std::vector<Field> f{
      RPPG_FIELD("licvpr.mu", li.nlms.mu, as_double),
      RPPG_FIELD("licvpr.order", li.nlms.order, as_count),
      RPPG_FIELD("licvpr.rectify", li.rectify, as_bool),
      RPPG_FIELD("licvpr.eliminate", li.eliminate_motion, as_bool),
      RPPG_FIELD("licvpr.segment_s", li.segment_s, as_double),
      RPPG_FIELD("licvpr.percentile", li.discard_percentile, as_double),
      RPPG_FIELD("licvpr.lambda", li.detrend_lambda, as_double),
      RPPG_FIELD("licvpr.ma_window", li.ma_window, as_count),
      RPPG_FIELD("licvpr.band_lo", li.band.lo, as_double),
      RPPG_FIELD("licvpr.band_hi", li.band.hi, as_double),
      RPPG_FIELD("licvpr.filter_taps", li.filter_taps, as_int),
      RPPG_FIELD("licvpr.background_margin", li.background_margin, as_int),
      RPPG_FIELD("licvpr.strategy", li.strategy, as_strategy),
      RPPG_FIELD("licvpr.skin_tau", li.skin_tau, as_double),
  };
  return f;
}

const std::vector<Field>& ssr_fields() {
  static const std::vector<Field> f{
      RPPG_FIELD("ssr.window_l", ssr.window_l, as_count),
      RPPG_FIELD("ssr.strategy", ssr.strategy, as_strategy),
      RPPG_FIELD("ssr.skin_tau", ssr.skin_tau, as_double),
      RPPG_FIELD("ssr.degeneracy", ssr.degeneracy_ratio, as_double),
  };
  return f;
}

const std::vector<Field>& hr_fields() {
  static const std::vector<Field> f{
      RPPG_FIELD("hr.band_lo", hr.band.lo, as_double),
      RPPG_FIELD("hr.band_hi", hr.band.hi, as_double),
      RPPG_FIELD("hr.nfft_min", hr.nfft_min, as_count),
  };
  return f;
}

#undef RPPG_FIELD

std::vector<const Field*> fields_for(Algorithm algo) {
  const std::vector<Field>* own = nullptr;
  switch (algo) {
    case Algorithm::chrom: own = &chrom_fields(); break;
    case Algorithm::licvpr: own = &licvpr_fields(); break;
    case Algorithm::ssr: own = &ssr_fields(); break;
  }
  std::vector<const Field*> out;
  for (const Field& f : *own) out.push_back(&f);
  for (const Field& f : hr_fields()) out.push_back(&f);
  return out;
}

}  // namespace

std::vector<std::string> parameter_keys(Algorithm algo) {
  std::vector<std::string> keys;
  for (const Field* f : fields_for(algo)) keys.push_back(f->key);
  return keys;
}

ParamSet default_params(Algorithm algo) {
  AlgorithmParams p;
  p.algorithm = algo;
  ParamSet out;
  for (const Field* f : fields_for(algo)) out[f->key] = f->get(p);
  return out;
}

AlgorithmParams make_params(Algorithm algo, const ParamSet& overrides) {
  AlgorithmParams p;
  p.algorithm = algo;
  const auto fields = fields_for(algo);
  for (const auto& [key, value] : overrides) {
    const Field* match = nullptr;
    for (const Field* f : fields)
      if (f->key == key) match = f;
    if (!match) throw InvalidArgument("unknown parameter '" + key + "' for algorithm " + std::string(to_string(algo)));
    match->set(p, value);
  }
  return p;
}

std::pair<std::string, std::string> parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw InvalidArgument("parameter override must be key=value: " + text);
  return {std::string(trim(std::string_view(text).substr(0, eq))),
          std::string(trim(std::string_view(text).substr(eq + 1)))};
}

SequenceData load_sequence(const fs::path& dir, const std::string& id) {
  const auto paths = BundlePaths::in(dir);
  for (const fs::path& p : {paths.video, paths.face_roi})
    if (!fs::exists(p)) throw IoError("missing file " + p.string());
  FrameSequence video = read_rvid(paths.video);
  video.set_sequence_id(id);
  const FrameGeometry geom{video.width(), video.height()};
  RoiTrack face = read_roi_track(paths.face_roi, geom);
  std::optional<RoiTrack> landmarks;
  if (fs::exists(paths.landmarks)) landmarks = read_roi_track(paths.landmarks, geom);
  std::optional<PhysioSignal> bvp;
  if (fs::exists(paths.bvp_csv)) bvp = read_physio_csv(paths.bvp_csv, paths.bvp_meta);
  std::optional<double> truth;
  if (fs::exists(paths.truth)) truth = read_truth_hr(paths.truth);
  return SequenceData{id, std::move(video), std::move(face), std::move(landmarks), std::move(bvp), truth};
}

namespace {

const RoiTrack& track_for(const SequenceData& seq, RoiStrategy strategy) {
  if (strategy != RoiStrategy::mask) return seq.face;
  if (!seq.landmarks) throw InvalidArgument("sequence " + seq.id + ": strategy 'mask' needs a landmark track");
  return *seq.landmarks;
}

}  // namespace

RgbTrace extract_trace(const SequenceData& seq, RoiStrategy strategy, double tau) {
  return mean_rgb_trace(seq.video, track_for(seq, strategy), PixelSelection{strategy, tau, std::nullopt});
}

PulseSignal extract_pulse(const SequenceData& seq, const AlgorithmParams& params) {
  switch (params.algorithm) {
    case Algorithm::chrom: {
      const RgbTrace trace = extract_trace(seq, params.chrom.strategy, params.chrom.skin_tau);
      return chrom_pulse(trace, params.chrom);
    }
    case Algorithm::licvpr: {
      const LiParams& li = params.li;
      const RgbTrace trace = extract_trace(seq, li.strategy, li.skin_tau);
      const Signal1D bg = background_trace(seq.video, seq.face, li.background_margin);
      PulseSignal p = licvpr_pulse(trace.channel(1), bg, li);
      p.fallback_fraction = trace.fallback_fraction();
      return p;
    }
    case Algorithm::ssr: {
      const SsrParams& sp = params.ssr;
      double fallback = 0.0;
      const auto eig = frame_eigens(seq.video, track_for(seq, sp.strategy),
                                    PixelSelection{sp.strategy, sp.skin_tau, std::nullopt}, &fallback);
      PulseSignal p = ssr_pulse(eig, seq.video.fps_hz(), sp);
      p.fallback_fraction = fallback;
      return p;
    }
  }
  throw InvalidArgument("unknown algorithm");
}

HrEstimate estimate_hr(const PulseSignal& pulse, const AlgorithmParams& params) {
  return estimate_hr_spectral(pulse.signal, params.hr.band, params.hr.nfft_min);
}

double ground_truth_hr(const SequenceData& seq) {
  if (seq.bvp) {
    const Signal1D& s = seq.bvp->signal;
    return hr_from_peaks(detect_peaks(s), s.fs()).bpm;
  }
  if (seq.truth_hr) return *seq.truth_hr;
  throw InvalidArgument("sequence " + seq.id + " has no ground truth");
}

}  // namespace rppg
