#include "rppg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rppg/errors.hpp"
#include "rppg/synth.hpp"
#include "rppg/text.hpp"

namespace rppg {

namespace fs = std::filesystem;
using nlohmann::json;

void DirectorySource::check_available(const ProtocolEntry& entry) const {
  const auto paths = BundlePaths::in(root_ / entry.sequence_id);
  for (const fs::path& p : {paths.video, paths.face_roi})
    if (!fs::exists(p)) throw IoError("missing file " + p.string());
  if (!fs::exists(paths.bvp_csv) && !fs::exists(paths.truth))
    throw IoError("missing file " + paths.bvp_csv.string() + " (no ground truth for " + entry.sequence_id + ")");
}

SequenceData DirectorySource::load(const ProtocolEntry& entry) const {
  return load_sequence(root_ / entry.sequence_id, entry.sequence_id);
}

std::optional<std::string> DirectorySource::subject_of(const ProtocolEntry& entry) const {
  const fs::path meta = BundlePaths::in(root_ / entry.sequence_id).bvp_meta;
  if (!fs::exists(meta)) return std::nullopt;
  std::ifstream in(meta);
  try {
    const json j = json::parse(in);
    if (j.contains("subject_id")) return j.at("subject_id").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError(meta.string() + ": " + e.what());
  }
  return std::nullopt;
}

GeneratedSource::GeneratedSource(std::vector<SynthConfig> configs) : configs_(std::move(configs)) {}

const SynthConfig& GeneratedSource::find(const std::string& id) const {
  for (const auto& c : configs_)
    if (c.sequence_id == id) return c;
  throw IoError("no generated sequence with id " + id);
}

void GeneratedSource::check_available(const ProtocolEntry& entry) const { find(entry.sequence_id); }

SequenceData GeneratedSource::load(const ProtocolEntry& entry) const {
  SynthBundle b = generate(find(entry.sequence_id));
  return SequenceData{entry.sequence_id, std::move(b.video), std::move(b.face), std::move(b.landmarks),
                      std::move(b.bvp), b.hr_bpm};
}

std::optional<std::string> GeneratedSource::subject_of(const ProtocolEntry& entry) const {
  return find(entry.sequence_id).subject_id;
}

Estimator pipeline_estimator(const AlgorithmParams& params) {
  return [params](const SequenceData& seq) { return estimate_hr(extract_pulse(seq, params), params).bpm; };
}

void compute_aggregates(EvalReport& report) {
  std::vector<double> est, truth;
  report.ok_count = report.failed_count = 0;
  for (const auto& r : report.sequences) {
    if (r.status == SequenceStatus::ok) {
      ++report.ok_count;
      est.push_back(r.estimated_bpm.value());
      truth.push_back(r.ground_truth_bpm.value());
    } else {
      ++report.failed_count;
    }
  }
  if (report.ok_count < 2)
    throw AggregateUndefined("only " + std::to_string(report.ok_count) + " of " +
                             std::to_string(report.sequences.size()) + " sequences succeeded; need at least 2");
  report.rmse = rmse(est, truth);
  report.pearson_rho = pearson(est, truth);
}

namespace {

std::string subject_or_empty(const ProtocolEntry& e, const SequenceSource& source) {
  if (e.subject_id) return *e.subject_id;
  return source.subject_of(e).value_or("");
}

void check_hygiene(const ProtocolIndex& protocol, Split split, const SequenceSource& source) {
  const Split other = split == Split::train ? Split::test : Split::train;
  std::set<std::string> theirs;
  for (const auto& e : protocol.split(other)) {
    const std::string s = subject_or_empty(e, source);
    if (!s.empty()) theirs.insert(s);
  }
  for (const auto& e : protocol.split(split)) {
    const std::string s = subject_or_empty(e, source);
    if (!s.empty() && theirs.count(s))
      throw SplitOverlap("protocol " + protocol.name() + ": subject '" + s + "' of sequence " + e.sequence_id +
                         " appears in both train and test splits");
  }
}

}  // namespace

EvalReport evaluate(const ProtocolIndex& protocol, Split split, const SequenceSource& source,
                    const std::string& algorithm_name, const ParamSet& params, const Estimator& estimator,
                    unsigned jobs) {
  std::vector<ProtocolEntry> entries = protocol.split(split);
  std::sort(entries.begin(), entries.end(),
            [](const ProtocolEntry& a, const ProtocolEntry& b) { return a.sequence_id < b.sequence_id; });
  for (const auto& e : entries) source.check_available(e);
  check_hygiene(protocol, split, source);

  std::vector<SequenceResult> results(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      SequenceResult& r = results[i];
      r.sequence_id = entries[i].sequence_id;
      try {
        const SequenceData data = source.load(entries[i]);
        r.ground_truth_bpm = ground_truth_hr(data);
        r.estimated_bpm = estimator(data);
        r.status = SequenceStatus::ok;
      } catch (const std::exception& ex) {
        r.status = SequenceStatus::failed;
        r.estimated_bpm.reset();
        r.message = ex.what();
      }
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(1, entries.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  EvalReport report;
  report.protocol = protocol.name();
  report.split = split;
  report.algorithm = algorithm_name;
  report.params = params;
  report.sequences = std::move(results);
  compute_aggregates(report);
  return report;
}

EvalReport evaluate(const ProtocolIndex& protocol, Split split, Algorithm algo, const ParamSet& params,
                    const SequenceSource& source, unsigned jobs) {
  const AlgorithmParams p = make_params(algo, params);
  return evaluate(protocol, split, source, std::string(to_string(algo)), params, pipeline_estimator(p), jobs);
}

// -- greedy search -------------------------------------------------------------

std::optional<Objective> parse_objective(std::string_view s) {
  if (s == "pearson") return Objective::pearson;
  if (s == "neg_rmse") return Objective::neg_rmse;
  return std::nullopt;
}

std::string_view to_string(Objective o) { return o == Objective::pearson ? "pearson" : "neg_rmse"; }

std::size_t search_budget(const std::vector<SearchStage>& stages) {
  std::size_t total = 0;
  for (const auto& st : stages) {
    std::size_t prod = 1;
    for (const auto& p : st.params) prod *= p.values.size();
    total += prod;
  }
  return total;
}

void validate_stages(const std::vector<SearchStage>& stages) {
  if (stages.empty()) throw InvalidArgument("search needs at least one stage");
  std::set<std::string> seen;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    if (stages[k].params.empty()) throw InvalidArgument("search stage " + std::to_string(k) + " has no parameters");
    for (const auto& p : stages[k].params) {
      if (p.values.empty()) throw InvalidArgument("empty grid for parameter " + p.name);
      if (!seen.insert(p.name).second) throw InvalidArgument("parameter " + p.name + " appears in more than one place");
    }
  }
}

SearchResult greedy_search(const std::vector<SearchStage>& stages, const ParamSet& base, Objective objective,
                           const CandidateScorer& score) {
  validate_stages(stages);
  SearchResult result;
  ParamSet current = base;

  for (std::size_t k = 0; k < stages.size(); ++k) {
    const auto& params = stages[k].params;
    std::vector<std::size_t> idx(params.size(), 0);
    std::optional<double> best_obj;
    ParamSet best_assignment;
    for (bool more = true; more;) {
      ParamSet assignment;
      for (std::size_t i = 0; i < params.size(); ++i) assignment[params[i].name] = params[i].values[idx[i]];
      ParamSet candidate = current;
      for (const auto& [key, value] : assignment) candidate[key] = value;

      SearchEvaluation ev{k, assignment, std::nullopt, {}};
      try {
        const EvalReport report = score(candidate);
        const double v = objective == Objective::pearson ? report.pearson_rho : -report.rmse;
        if (!std::isfinite(v)) throw NumericDegeneracy("objective is not finite");
        ev.objective = v;
      } catch (const std::exception& ex) {
        ev.error = ex.what();
      }
      ++result.evaluations;
      if (ev.objective && (!best_obj || *ev.objective > *best_obj)) {
        best_obj = ev.objective;
        best_assignment = assignment;
      }
      result.trace.push_back(std::move(ev));

      // Odometer, last parameter fastest.
      more = false;
      for (std::size_t i = params.size(); i-- > 0;) {
        if (++idx[i] < params[i].values.size()) {
          more = true;
          break;
        }
        idx[i] = 0;
      }
    }
    if (!best_obj) {
      const std::string label = stages[k].name.empty() ? std::to_string(k) : std::to_string(k) + " (" + stages[k].name + ")";
      throw SearchFailed("every candidate of search stage " + label + " failed", k);
    }
    for (const auto& [key, value] : best_assignment) current[key] = value;
    result.stage_optima.push_back(best_assignment);
  }
  result.best = current;
  return result;
}

SearchResult greedy_search(const std::vector<SearchStage>& stages, const ProtocolIndex& protocol, Algorithm algo,
                           Objective objective, const SequenceSource& source, unsigned jobs, const ParamSet& base) {
  validate_stages(stages);
  const auto keys = parameter_keys(algo);
  for (const auto& st : stages)
    for (const auto& p : st.params)
      if (std::find(keys.begin(), keys.end(), p.name) == keys.end())
        throw InvalidArgument("unknown parameter '" + p.name + "' for algorithm " + std::string(to_string(algo)));
  make_params(algo, base);
  return greedy_search(stages, base, objective, [&](const ParamSet& candidate) {
    return evaluate(protocol, Split::train, algo, candidate, source, jobs);
  });
}

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw IoError("write failed: " + path.string());
}

json parse_json_file(const fs::path& path) {
  std::ifstream in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string grid_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_number(v.get<double>());
  return v.dump();
}

json opt_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_null(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

std::vector<SearchStage> read_search_stages(const fs::path& path) {
  const json j = parse_json_file(path);
  std::vector<SearchStage> stages;
  try {
    for (const auto& st : j.at("stages")) {
      SearchStage stage;
      stage.name = st.value("name", "");
      // Array form keeps the given parameter order; object form is sorted by key.
      const json& ps = st.at("params");
      if (ps.is_array()) {
        for (const auto& p : ps) {
          SearchParam sp{p.at("name").get<std::string>(), {}};
          for (const auto& v : p.at("values")) sp.values.push_back(grid_value(v));
          stage.params.push_back(std::move(sp));
        }
      } else {
        for (const auto& [key, values] : ps.items()) {
          SearchParam sp{key, {}};
          for (const auto& v : values) sp.values.push_back(grid_value(v));
          stage.params.push_back(std::move(sp));
        }
      }
      stages.push_back(std::move(stage));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  validate_stages(stages);
  return stages;
}

void write_search_result(const SearchResult& result, const fs::path& path) {
  json trace = json::array();
  for (const auto& ev : result.trace)
    trace.push_back({{"stage", ev.stage}, {"assignment", ev.assignment}, {"objective", opt_number(ev.objective)},
                     {"error", ev.error}});
  const json j{{"best", result.best},
               {"stage_optima", result.stage_optima},
               {"evaluations", result.evaluations},
               {"trace", trace}};
  write_text(path, j.dump(2) + "\n");
}

SearchResult read_search_result(const fs::path& path) {
  const json j = parse_json_file(path);
  try {
    SearchResult r;
    r.best = j.at("best").get<ParamSet>();
    r.stage_optima = j.at("stage_optima").get<std::vector<ParamSet>>();
    r.evaluations = j.at("evaluations").get<std::size_t>();
    for (const auto& ev : j.at("trace"))
      r.trace.push_back({ev.at("stage").get<std::size_t>(), ev.at("assignment").get<ParamSet>(),
                         number_or_null(ev.at("objective")), ev.at("error").get<std::string>()});
    return r;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// -- reports ---------------------------------------------------------------------

namespace {

std::string_view status_name(SequenceStatus s) { return s == SequenceStatus::ok ? "ok" : "failed"; }

SequenceStatus parse_status(std::string_view s, const fs::path& path) {
  if (s == "ok") return SequenceStatus::ok;
  if (s == "failed") return SequenceStatus::failed;
  throw FormatError(path.string() + ": unknown status '" + std::string(s) + "'");
}

std::string opt_text(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::optional<double> opt_parse(std::string_view field, const fs::path& path, std::size_t row) {
  if (trim(field).empty()) return std::nullopt;
  const auto v = parse_double(field);
  if (!v) throw FormatError(path.string() + ": bad number '" + std::string(field) + "'", std::nullopt, row);
  return v;
}

}  // namespace

void emit_report(const EvalReport& report, const fs::path& path, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::ostringstream out;
    out << "sequence_id,estimated_bpm,ground_truth_bpm,status\n";
    for (const auto& r : report.sequences)
      out << r.sequence_id << ',' << opt_text(r.estimated_bpm) << ',' << opt_text(r.ground_truth_bpm) << ','
          << status_name(r.status) << '\n';
    out << "rmse," << format_number(report.rmse) << '\n';
    out << "pearson," << format_number(report.pearson_rho) << '\n';
    write_text(path, out.str());
    return;
  }
  json rows = json::array();
  for (const auto& r : report.sequences)
    rows.push_back({{"sequence_id", r.sequence_id},
                    {"estimated_bpm", opt_number(r.estimated_bpm)},
                    {"ground_truth_bpm", opt_number(r.ground_truth_bpm)},
                    {"status", status_name(r.status)},
                    {"message", r.message}});
  const json j{{"protocol", report.protocol},
               {"split", to_string(report.split)},
               {"algorithm", report.algorithm},
               {"params", report.params},
               {"sequences", rows},
               {"rmse", report.rmse},
               {"pearson_rho", report.pearson_rho},
               {"ok_count", report.ok_count},
               {"failed_count", report.failed_count}};
  write_text(path, j.dump(2) + "\n");
}

EvalReport read_report(const fs::path& path, ReportFormat format) {
  EvalReport report;
  if (format == ReportFormat::json) {
    const json j = parse_json_file(path);
    try {
      report.protocol = j.at("protocol").get<std::string>();
      const auto split = parse_split(j.at("split").get<std::string>());
      if (!split) throw FormatError(path.string() + ": unknown split");
      report.split = *split;
      report.algorithm = j.at("algorithm").get<std::string>();
      report.params = j.at("params").get<ParamSet>();
      for (const auto& r : j.at("sequences"))
        report.sequences.push_back({r.at("sequence_id").get<std::string>(), number_or_null(r.at("estimated_bpm")),
                                    number_or_null(r.at("ground_truth_bpm")),
                                    parse_status(r.at("status").get<std::string>(), path),
                                    r.at("message").get<std::string>()});
      report.rmse = j.at("rmse").get<double>();
      report.pearson_rho = j.at("pearson_rho").get<double>();
      report.ok_count = j.at("ok_count").get<std::size_t>();
      report.failed_count = j.at("failed_count").get<std::size_t>();
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
    return report;
  }

  std::ifstream in = open_in(path);
  std::string line;
  std::size_t row = 0;
  bool have_rmse = false, have_pearson = false;
  if (!std::getline(in, line) || trim(line) != "sequence_id,estimated_bpm,ground_truth_bpm,status")
    throw FormatError(path.string() + ": missing report header", std::nullopt, 1);
  row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (f.size() == 2 && (f[0] == "rmse" || f[0] == "pearson")) {
      const auto v = opt_parse(f[1], path, row);
      if (!v) throw FormatError(path.string() + ": empty aggregate", std::nullopt, row);
      (f[0] == "rmse" ? report.rmse : report.pearson_rho) = *v;
      (f[0] == "rmse" ? have_rmse : have_pearson) = true;
      continue;
    }
    if (f.size() != 4) throw FormatError(path.string() + ": expected 4 fields", std::nullopt, row);
    SequenceResult r{std::string(f[0]), opt_parse(f[1], path, row), opt_parse(f[2], path, row),
                     parse_status(trim(f[3]), path), {}};
    (r.status == SequenceStatus::ok ? report.ok_count : report.failed_count)++;
    report.sequences.push_back(std::move(r));
  }
  if (!have_rmse || !have_pearson) throw FormatError(path.string() + ": missing rmse/pearson trailer rows");
  return report;
}

}  // namespace rppg
