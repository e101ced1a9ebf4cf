#ifndef TRUSTAN_PIPELINE_H_
#define TRUSTAN_PIPELINE_H_

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trustan/adapter.h"
#include "trustan/corpus.h"
#include "trustan/errors.h"
#include "trustan/ethos.h"
#include "trustan/forecast.h"
#include "trustan/text.h"
#include "trustan/trend.h"

namespace trustan {

// Error raised by a pipeline stage; what() is prefixed with "[stage] ".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct RunConfig {
  std::vector<std::filesystem::path> inputs;
  std::vector<std::string> fetch_urls;
  std::optional<std::filesystem::path> aliases_path;  // default aliases if unset
  std::optional<std::filesystem::path> lexicon_path;
  std::optional<std::string> adapter_cmd;
  std::optional<std::string> adapter_url;
  MetricOptions metrics;
  VerdictOptions verdict;
  AdapterOptions adapter;
  FetchOptions fetch;
  std::filesystem::path out_dir;
  bool strict = true;

  // Throws InvalidArgument unless exactly one classifier is selected, there
  // is at least one input, and min_n >= 1, alpha >= 0, window_weeks >= 2,
  // theta >= 0.
  void validate() const;
  // Checks the classifier and numeric parameters only.
  void validate_classifier() const;
  void validate_metrics() const;
};

// Artifact names written under the output directory.
namespace artifacts {
inline constexpr const char* kCorpus = "corpus.jsonl";
inline constexpr const char* kStats = "stats.json";
inline constexpr const char* kMentions = "mentions.jsonl";
inline constexpr const char* kCounts = "counts.csv";
inline constexpr const char* kProportion = "proportion.csv";
inline constexpr const char* kSlope = "slope.csv";
inline constexpr const char* kRatio = "ratio.csv";
inline constexpr const char* kProfile = "profile.csv";
inline constexpr const char* kPrediction = "prediction.json";
}  // namespace artifacts

Corpus ingest_sources(const RunConfig& config);
AliasMap load_aliases(const RunConfig& config);
std::unique_ptr<Classifier> make_classifier(const RunConfig& config);

std::string render_stats_json(const PipelineStats& stats);

struct Analysis {
  std::vector<WeeklyCounts> counts;
  std::vector<EntityMetrics> metrics;
  Prediction prediction;
};

// Bins, computes every metric and predicts the winner. Exactly two entities
// must have labeled mentions.
Analysis analyze(std::span<const LabeledMention> labels,
                 const MetricOptions& metrics, const VerdictOptions& verdict);

// counts.csv, the four series CSVs and prediction.json.
void write_analysis(const Analysis& analysis, const std::filesystem::path& dir);

// Renders the three charts from the series CSVs found in series_dir.
void write_charts(const std::filesystem::path& series_dir,
                  const std::filesystem::path& out_dir,
                  std::span<const EventMarker> events);

// Stages every artifact in a sibling temp directory and renames it onto
// config.out_dir only on success. Errors are rethrown as StageError.
PipelineStats run_pipeline(const RunConfig& config);

// Runs body against a fresh sibling temp directory of target and promotes
// it to target when body returns.
void write_atomically(const std::filesystem::path& target,
                      const std::function<void(const std::filesystem::path&)>& body);

}  // namespace trustan

#endif  // TRUSTAN_PIPELINE_H_
