#pragma once

// Protocol-driven evaluation, stage-wise parameter search and reports.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rppg/media_io.hpp"
#include "rppg/params.hpp"
#include "rppg/synth.hpp"

namespace rppg {

enum class SequenceStatus { ok, failed };

struct SequenceResult {
  std::string sequence_id;
  std::optional<double> estimated_bpm;
  std::optional<double> ground_truth_bpm;
  SequenceStatus status = SequenceStatus::ok;
  std::string message;

  bool operator==(const SequenceResult&) const = default;
};

struct EvalReport {
  std::string protocol;
  Split split = Split::test;
  std::string algorithm;
  ParamSet params;
  std::vector<SequenceResult> sequences;  ///< sorted by sequence id
  double rmse = 0.0;
  double pearson_rho = 0.0;
  std::size_t ok_count = 0;
  std::size_t failed_count = 0;

  bool operator==(const EvalReport&) const = default;
};

/// Where evaluate() gets sequences from.
class SequenceSource {
 public:
  virtual ~SequenceSource() = default;
  /// Throws IoError naming the first missing file, if any.
  virtual void check_available(const ProtocolEntry& entry) const = 0;
  virtual SequenceData load(const ProtocolEntry& entry) const = 0;
  /// Subject id when the protocol row does not carry one.
  virtual std::optional<std::string> subject_of(const ProtocolEntry& entry) const = 0;
};

/// Bundles laid out as <root>/<sequence_id>/{seq.rvid, roi.csv, ...}.
class DirectorySource : public SequenceSource {
 public:
  explicit DirectorySource(std::filesystem::path root) : root_(std::move(root)) {}
  void check_available(const ProtocolEntry& entry) const override;
  SequenceData load(const ProtocolEntry& entry) const override;
  std::optional<std::string> subject_of(const ProtocolEntry& entry) const override;

 private:
  std::filesystem::path root_;
};

/// Sequences generated on demand from synthetic configs, matched by id.
class GeneratedSource : public SequenceSource {
 public:
  explicit GeneratedSource(std::vector<SynthConfig> configs);
  void check_available(const ProtocolEntry& entry) const override;
  SequenceData load(const ProtocolEntry& entry) const override;
  std::optional<std::string> subject_of(const ProtocolEntry& entry) const override;

 private:
  const SynthConfig& find(const std::string& id) const;
  std::vector<SynthConfig> configs_;
};

/// Per-sequence estimator: returns the estimated bpm or throws.
using Estimator = std::function<double(const SequenceData&)>;

Estimator pipeline_estimator(const AlgorithmParams& params);

/// Scores one split. Refuses (SplitOverlap) when a subject of the split also
/// appears in the other split. Per-sequence errors become failed rows.
/// Fewer than two ok rows throws AggregateUndefined. `jobs` = 0 uses all
/// hardware threads; results do not depend on it.
EvalReport evaluate(const ProtocolIndex& protocol, Split split, const SequenceSource& source,
                    const std::string& algorithm_name, const ParamSet& params, const Estimator& estimator,
                    unsigned jobs = 1);

EvalReport evaluate(const ProtocolIndex& protocol, Split split, Algorithm algo, const ParamSet& params,
                    const SequenceSource& source, unsigned jobs = 1);

/// Recomputes ok/failed counts, RMSE and Pearson from the rows.
void compute_aggregates(EvalReport& report);

// -- greedy search -----------------------------------------------------------

struct SearchParam {
  std::string name;
  std::vector<std::string> values;
};

struct SearchStage {
  std::string name;
  std::vector<SearchParam> params;
};

enum class Objective { pearson, neg_rmse };

std::optional<Objective> parse_objective(std::string_view s);
std::string_view to_string(Objective o);

struct SearchEvaluation {
  std::size_t stage = 0;
  ParamSet assignment;  ///< this stage's parameters only
  std::optional<double> objective;
  std::string error;

  bool operator==(const SearchEvaluation&) const = default;
};

struct SearchResult {
  ParamSet best;  ///< full parameter set: stage optima over the base
  std::vector<ParamSet> stage_optima;
  std::vector<SearchEvaluation> trace;
  std::size_t evaluations = 0;

  bool operator==(const SearchResult&) const = default;
};

/// Upper bound on evaluations: sum over stages of the product of grid sizes.
std::size_t search_budget(const std::vector<SearchStage>& stages);

/// Throws InvalidArgument on empty grids or a parameter in more than one place.
void validate_stages(const std::vector<SearchStage>& stages);

using CandidateScorer = std::function<EvalReport(const ParamSet&)>;

/// Stage by stage, every combination of the stage's grid is scored with
/// earlier stages fixed at their optima and later ones at `base`. Ties keep
/// the earliest candidate. A stage with no successful candidate throws
/// SearchFailed.
SearchResult greedy_search(const std::vector<SearchStage>& stages, const ParamSet& base, Objective objective,
                           const CandidateScorer& score);

/// Search on the protocol's train split with the full pipeline.
SearchResult greedy_search(const std::vector<SearchStage>& stages, const ProtocolIndex& protocol, Algorithm algo,
                           Objective objective, const SequenceSource& source, unsigned jobs = 1,
                           const ParamSet& base = {});

/// Stages given as JSON: [{"name": "...", "params": {"key": ["v1", "v2"]}}].
/// Numbers in grids are accepted and kept in their JSON text form.
std::vector<SearchStage> read_search_stages(const std::filesystem::path& path);

void write_search_result(const SearchResult& result, const std::filesystem::path& path);
SearchResult read_search_result(const std::filesystem::path& path);

// -- reports -----------------------------------------------------------------

enum class ReportFormat { csv, json };

void emit_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format);

/// CSV keeps rows and aggregates only; JSON restores every field.
EvalReport read_report(const std::filesystem::path& path, ReportFormat format);

// -- published baselines on gated datasets (not runnable here) ---------------

namespace reference {

struct Baseline {
  const char* algorithm;
  double rmse;
  double pearson;
};

/// Mahnob HCI-Tagging, 527 sequences, frames 306 to 2135.
inline constexpr Baseline kHci527[] = {
    {"licvpr", 8.12, 0.70},
    {"chrom", 15.40, 0.33},
    {"ssr", 18.4, 0.43},
};

struct SplitPearson {
  const char* algorithm;
  double train;
  double test;
};

/// Pearson correlation on the HCI train/test protocol.
inline constexpr SplitPearson kHciProtocol[] = {
    {"licvpr", 0.49, 0.45},
    {"chrom", 0.15, 0.14},
    {"ssr", 0.17, 0.05},
};

/// Pearson correlation on the COHFACE studio-light protocol.
inline constexpr SplitPearson kCohfaceStudio[] = {
    {"licvpr", -0.16, -0.61},
    {"chrom", 0.23, 0.43},
    {"ssr", 0.07, -0.31},
};

struct CrossPearson {
  const char* algorithm;
  double hci_to_cohface;
  double cohface_to_hci;
  double studio_to_natural;
};

/// Trained on one set, tested on another.
inline constexpr CrossPearson kCrossDataset[] = {
    {"licvpr", -0.20, 0.25, -0.24},
    {"chrom", 0.51, 0.10, -0.03},
    {"ssr", -0.15, 0.00, 0.00},
};

struct RoiPearson {
  const char* algorithm;
  double bbox;
  double skin;
  double mask;
};

/// Pearson correlation on the COHFACE test set per pixel-selection strategy.
inline constexpr RoiPearson kCohfaceRoi[] = {
    {"licvpr", -0.29, -0.16, -0.44},
    {"chrom", 0.30, 0.27, 0.30},
    {"ssr", 0.26, 0.09, 0.65},
};

}  // namespace reference

}  // namespace rppg
