// Command-line front end: synth, trace, pulse, hr, eval, search.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rppg/bench.hpp"
#include "rppg/errors.hpp"
#include "rppg/params.hpp"
#include "rppg/synth.hpp"
#include "rppg/text.hpp"

namespace fs = std::filesystem;
using namespace rppg;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

/// Raised for argument problems found after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw IoError("write failed: " + path.string());
}

Algorithm algorithm_arg(const std::string& name) {
  const auto a = parse_algorithm(name);
  if (!a) throw UsageError("unknown algorithm '" + name + "' (expected chrom, licvpr or ssr)");
  return *a;
}

ParamSet overrides_arg(const std::vector<std::string>& items, Algorithm algo) {
  ParamSet out;
  try {
    for (const auto& item : items) {
      auto [k, v] = parse_override(item);
      out[k] = v;
    }
    make_params(algo, out);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return out;
}

SequenceData load_inputs(const fs::path& video_path, const fs::path& roi_path, const std::string& landmarks_path) {
  for (const fs::path& p : {video_path, roi_path})
    if (!fs::exists(p)) throw IoError("missing file " + p.string());
  FrameSequence video = read_rvid(video_path);
  const FrameGeometry geom{video.width(), video.height()};
  RoiTrack face = read_roi_track(roi_path, geom);
  std::optional<RoiTrack> landmarks;
  fs::path lm = landmarks_path;
  if (lm.empty() && fs::exists(roi_path.parent_path() / "landmarks.csv")) lm = roi_path.parent_path() / "landmarks.csv";
  if (!lm.empty()) landmarks = read_roi_track(lm, geom);
  std::string id = video.sequence_id();
  return SequenceData{std::move(id), std::move(video), std::move(face), std::move(landmarks), std::nullopt, std::nullopt};
}

/// `t,value` CSV; the rate comes from a `.json` sidecar with sample_rate_hz
/// when present, otherwise from the first timestamp step.
Signal1D read_series(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  const auto header = split_fields(trim(line));
  if (header.size() != 2 || trim(header[0]) != "t" || trim(header[1]) != "value")
    throw FormatError(path.string() + ": expected header t,value", std::nullopt, 1);
  std::vector<double> t, v;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    const auto a = f.size() == 2 ? parse_double(f[0]) : std::nullopt;
    const auto b = f.size() == 2 ? parse_double(f[1]) : std::nullopt;
    if (!a || !b) throw FormatError(path.string() + ": malformed row", std::nullopt, row);
    t.push_back(*a);
    v.push_back(*b);
  }
  if (v.size() < 2) throw FormatError(path.string() + ": need at least 2 samples");
  double fs_hz = 0.0;
  fs::path meta = path;
  meta.replace_extension(".json");
  if (fs::exists(meta)) {
    std::ifstream m(meta);
    try {
      fs_hz = nlohmann::json::parse(m).at("sample_rate_hz").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(meta.string() + ": " + e.what());
    }
  } else {
    fs_hz = 1.0 / (t[1] - t[0]);
  }
  return Signal1D(std::move(v), fs_hz);
}

std::string series_csv(const Signal1D& s) {
  std::ostringstream out;
  out << "t,value\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out << format_number(static_cast<double>(i) / s.fs()) << ',' << format_number(s[i]) << '\n';
  return out.str();
}

ReportFormat report_format(const std::string& explicit_format, const fs::path& out) {
  const std::string f = explicit_format.empty() ? out.extension().string() : explicit_format;
  if (f == "json" || f == ".json") return ReportFormat::json;
  if (f == "csv" || f == ".csv" || f.empty()) return ReportFormat::csv;
  throw UsageError("unknown report format '" + f + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Remote photoplethysmography toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic sequence bundle (or a dataset with --count)");
  SynthConfig sc;
  std::string synth_out;
  std::size_t count = 0;
  double hr_min = 50.0, hr_max = 110.0;
  std::size_t train_count = 0;
  double fps_hz = 20.0;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--hr", sc.hr_bpm, "Heart rate in bpm");
  synth->add_option("--seed", sc.seed, "Random seed");
  synth->add_option("--duration", sc.duration_s, "Duration in seconds");
  synth->add_option("--fps", fps_hz, "Frame rate (integer)");
  synth->add_option("--width", sc.width);
  synth->add_option("--height", sc.height);
  synth->add_option("--noise", sc.noise_sd, "Per-pixel Gaussian noise SD in levels");
  synth->add_option("--drift-hz", sc.drift_hz);
  synth->add_option("--drift-amp", sc.drift_amplitude);
  synth->add_option("--bvp-noise", sc.bvp_noise_sd);
  synth->add_option("--id", sc.sequence_id);
  synth->add_option("--subject", sc.subject_id);
  synth->add_option("--count", count, "Generate a dataset of this many sequences plus protocol.csv");
  synth->add_option("--hr-min", hr_min);
  synth->add_option("--hr-max", hr_max);
  synth->add_option("--train", train_count, "Sequences in the train split (default half)");

  // trace
  auto* trace = app.add_subcommand("trace", "Write the per-frame mean RGB trace");
  std::string trace_video, trace_roi, trace_lm, trace_out, trace_strategy = "bbox";
  double trace_tau = 0.3;
  trace->add_option("video", trace_video)->required();
  trace->add_option("--roi", trace_roi)->required();
  trace->add_option("--landmarks", trace_lm);
  trace->add_option("--strategy", trace_strategy, "bbox, skin or mask");
  trace->add_option("--tau", trace_tau);
  trace->add_option("--out", trace_out)->required();

  // pulse
  auto* pulse = app.add_subcommand("pulse", "Extract a pulse signal");
  std::string pulse_video, pulse_roi, pulse_lm, pulse_out = "pulse.csv", pulse_algo;
  std::vector<std::string> pulse_set;
  pulse->add_option("video", pulse_video)->required();
  pulse->add_option("--roi", pulse_roi)->required();
  pulse->add_option("--landmarks", pulse_lm, "Landmark track (default: landmarks.csv next to the ROI file)");
  pulse->add_option("--algo", pulse_algo)->required();
  pulse->add_option("--set", pulse_set, "Parameter override key=value");
  pulse->add_option("--out", pulse_out);

  // hr
  auto* hr = app.add_subcommand("hr", "Print the heart rate of a t,value signal");
  std::string hr_in = "pulse.csv";
  bool hr_peaks = false;
  double band_lo = kDefaultPulseBand.lo, band_hi = kDefaultPulseBand.hi;
  std::size_t nfft_min = 0;
  hr->add_option("input", hr_in);
  hr->add_flag("--peaks", hr_peaks, "Use the peak detector (for contact BVP)");
  hr->add_option("--band-lo", band_lo);
  hr->add_option("--band-hi", band_hi);
  hr->add_option("--nfft-min", nfft_min);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate an algorithm on a protocol split");
  std::string eval_protocol, eval_root, eval_algo, eval_split = "test", eval_out, eval_format;
  std::vector<std::string> eval_set;
  unsigned eval_jobs = 0;
  eval->add_option("--protocol", eval_protocol)->required();
  eval->add_option("--root", eval_root, "Dataset root (default: protocol directory)");
  eval->add_option("--algo", eval_algo)->required();
  eval->add_option("--split", eval_split);
  eval->add_option("--set", eval_set);
  eval->add_option("--jobs", eval_jobs, "Parallel sequences (0 = all cores)");
  eval->add_option("--out", eval_out)->required();
  eval->add_option("--format", eval_format, "csv or json (default: from extension)");

  // search
  auto* search = app.add_subcommand("search", "Greedy stage-wise parameter search on the train split");
  std::string search_protocol, search_root, search_algo, search_stages, search_out, search_objective = "pearson";
  std::vector<std::string> search_set;
  unsigned search_jobs = 0;
  search->add_option("--protocol", search_protocol)->required();
  search->add_option("--root", search_root);
  search->add_option("--algo", search_algo)->required();
  search->add_option("--stages", search_stages, "JSON stage definition")->required();
  search->add_option("--objective", search_objective, "pearson or neg_rmse");
  search->add_option("--set", search_set, "Base parameter overrides");
  search->add_option("--jobs", search_jobs);
  search->add_option("--out", search_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) {
      if (!(fps_hz > 0.0) || fps_hz != std::floor(fps_hz)) throw UsageError("--fps must be a positive integer");
      sc.fps = Rational{static_cast<std::int64_t>(fps_hz), 1};
      if (count == 0) {
        write_bundle(generate(sc), synth_out);
      } else {
        const auto configs = dataset_configs(sc, count, hr_min, hr_max, sc.seed);
        for (const auto& c : configs) write_bundle(generate(c), fs::path(synth_out) / c.sequence_id);
        const std::size_t n_train = train_count ? train_count : count / 2;
        write_protocol(dataset_protocol(configs, n_train, "synthetic"), fs::path(synth_out) / "protocol.csv");
      }
      return 0;
    }

    if (*trace) {
      const auto strategy = parse_strategy(trace_strategy);
      if (!strategy) throw UsageError("unknown strategy '" + trace_strategy + "'");
      const SequenceData seq = load_inputs(trace_video, trace_roi, trace_lm);
      const RgbTrace t = extract_trace(seq, *strategy, trace_tau);
      std::ostringstream out;
      out << "t,r,g,b,pixels\n";
      for (std::size_t i = 0; i < t.size(); ++i)
        out << format_number(static_cast<double>(i) / t.fs) << ',' << format_number(t.r[i]) << ','
            << format_number(t.g[i]) << ',' << format_number(t.b[i]) << ',' << t.counts[i] << '\n';
      write_file(trace_out, out.str());
      return 0;
    }

    if (*pulse) {
      const Algorithm algo = algorithm_arg(pulse_algo);
      const ParamSet overrides = overrides_arg(pulse_set, algo);
      const SequenceData seq = load_inputs(pulse_video, pulse_roi, pulse_lm);
      const PulseSignal p = extract_pulse(seq, make_params(algo, overrides));
      write_file(pulse_out, series_csv(p.signal));
      fs::path meta = pulse_out;
      meta.replace_extension(".json");
      const nlohmann::json j{{"sample_rate_hz", p.signal.fs()},
                             {"algorithm", to_string(algo)},
                             {"params", overrides},
                             {"fallback_fraction", p.fallback_fraction},
                             {"discarded_fraction", p.discarded_fraction},
                             {"skipped_windows", p.skipped_windows}};
      write_file(meta, j.dump(2) + "\n");
      return 0;
    }

    if (*hr) {
      const Signal1D s = read_series(hr_in);
      const HrEstimate est =
          hr_peaks ? hr_from_peaks(detect_peaks(s), s.fs()) : estimate_hr_spectral(s, BandHz{band_lo, band_hi}, nfft_min);
      std::printf("%.2f\n", est.bpm);
      if (est.low_confidence) std::fprintf(stderr, "warning: low-confidence spectral peak\n");
      return 0;
    }

    if (*eval) {
      const Algorithm algo = algorithm_arg(eval_algo);
      const ParamSet overrides = overrides_arg(eval_set, algo);
      const auto split = parse_split(eval_split);
      if (!split) throw UsageError("unknown split '" + eval_split + "'");
      const ReportFormat fmt = report_format(eval_format, eval_out);
      const ProtocolIndex protocol = load_protocol(eval_protocol);
      const fs::path root = eval_root.empty() ? fs::path(eval_protocol).parent_path() : fs::path(eval_root);
      const EvalReport report = evaluate(protocol, *split, algo, overrides, DirectorySource(root), eval_jobs);
      emit_report(report, eval_out, fmt);
      std::printf("rmse %s pearson %s ok %zu failed %zu\n", format_number(report.rmse).c_str(),
                  format_number(report.pearson_rho).c_str(), report.ok_count, report.failed_count);
      return 0;
    }

    if (*search) {
      const Algorithm algo = algorithm_arg(search_algo);
      const ParamSet base = overrides_arg(search_set, algo);
      const auto objective = parse_objective(search_objective);
      if (!objective) throw UsageError("unknown objective '" + search_objective + "'");
      const auto stages = read_search_stages(search_stages);
      const ProtocolIndex protocol = load_protocol(search_protocol);
      const fs::path root = search_root.empty() ? fs::path(search_protocol).parent_path() : fs::path(search_root);
      SearchResult result;
      try {
        result = greedy_search(stages, protocol, algo, *objective, DirectorySource(root), search_jobs, base);
      } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
      }
      write_search_result(result, search_out);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const NumericDegeneracy& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
