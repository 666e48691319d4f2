#pragma once

// Algorithm parameter sets with dotted-key overrides, and the end-to-end
// pulse and heart-rate pipeline for one sequence.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rppg/chrom.hpp"
#include "rppg/hr.hpp"
#include "rppg/licvpr.hpp"
#include "rppg/media_io.hpp"
#include "rppg/ssr.hpp"

namespace rppg {

/// Dotted key -> textual value, e.g. {"chrom.window_s", "1.6"}.
using ParamSet = std::map<std::string, std::string>;

struct HrParams {
  BandHz band = kDefaultPulseBand;
  std::size_t nfft_min = 0;
};

struct AlgorithmParams {
  Algorithm algorithm = Algorithm::chrom;
  ChromParams chrom;
  LiParams li;
  SsrParams ssr;
  HrParams hr;
};

/// Keys accepted for `algo`: its own prefix plus `hr.*`.
std::vector<std::string> parameter_keys(Algorithm algo);

/// Defaults of every key in parameter_keys(algo), formatted as text.
ParamSet default_params(Algorithm algo);

/// Applies overrides on top of the defaults. Unknown keys and unparsable
/// values throw InvalidArgument naming the key.
AlgorithmParams make_params(Algorithm algo, const ParamSet& overrides = {});

/// Parses `key=value`.
std::pair<std::string, std::string> parse_override(const std::string& text);

/// Everything the pipeline may need for one sequence.
struct SequenceData {
  std::string id;
  FrameSequence video;
  RoiTrack face;
  std::optional<RoiTrack> landmarks;
  std::optional<PhysioSignal> bvp;
  std::optional<double> truth_hr;
};

/// Loads a bundle directory (seq.rvid, roi.csv and optional landmarks.csv,
/// bvp.csv + bvp.json, hr.json). Missing required files throw IoError.
SequenceData load_sequence(const std::filesystem::path& dir, const std::string& id);

/// Mean RGB trace under the given ROI strategy.
RgbTrace extract_trace(const SequenceData& seq, RoiStrategy strategy, double tau);

PulseSignal extract_pulse(const SequenceData& seq, const AlgorithmParams& params);

HrEstimate estimate_hr(const PulseSignal& pulse, const AlgorithmParams& params);

/// Reference HR from BVP peaks when a BVP is present, else the stored value.
double ground_truth_hr(const SequenceData& seq);

}  // namespace rppg
