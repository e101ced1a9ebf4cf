#include "trustan/pipeline.h"

#include <unistd.h>

#include <json.hpp>

#include "trustan/errors.h"
#include "trustan/logging.h"
#include "trustan/report.h"

namespace trustan {
namespace fs = std::filesystem;

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::vector<WeeklySeries> collect(const std::vector<EntityMetrics>& metrics,
                                  std::initializer_list<WeeklySeries EntityMetrics::*> fields) {
  std::vector<WeeklySeries> out;
  for (const auto& m : metrics) {
    for (auto field : fields) out.push_back(m.*field);
  }
  return out;
}

}  // namespace

void RunConfig::validate_classifier() const {
  int selected = (lexicon_path ? 1 : 0) + (adapter_cmd ? 1 : 0) +
                 (adapter_url ? 1 : 0);
  if (selected != 1) {
    throw InvalidArgument(
        "exactly one classifier must be selected (--lexicon, --adapter-cmd or "
        "--adapter-url)");
  }
  if (adapter.batch_size == 0) throw InvalidArgument("batch size must be >= 1");
}

void RunConfig::validate_metrics() const {
  if (metrics.min_n < 1) throw InvalidArgument("--min-n must be >= 1");
  if (!(metrics.alpha >= 0.0)) throw InvalidArgument("--alpha must be >= 0");
  if (verdict.window_weeks < 2) {
    throw InvalidArgument("--window-weeks must be >= 2");
  }
  if (!(verdict.theta >= 0.0)) throw InvalidArgument("--theta must be >= 0");
}

void RunConfig::validate() const {
  validate_classifier();
  validate_metrics();
  if (inputs.empty() && fetch_urls.empty()) {
    throw InvalidArgument("no input: give --input or --fetch-url");
  }
  if (out_dir.empty()) throw InvalidArgument("--out is required");
}

Corpus ingest_sources(const RunConfig& config) {
  LoadOptions options{config.strict};
  std::vector<SourceBatch> batches;
  for (const auto& path : config.inputs) {
    batches.push_back(read_post_file(path, options));
  }
  for (const auto& url : config.fetch_urls) {
    batches.push_back({url, fetch_thread(url, config.fetch), 0});
  }
  return Corpus::merge(std::move(batches), options);
}

AliasMap load_aliases(const RunConfig& config) {
  return config.aliases_path ? AliasMap::load(*config.aliases_path)
                             : AliasMap::defaults();
}

std::unique_ptr<Classifier> make_classifier(const RunConfig& config) {
  config.validate_classifier();
  if (config.lexicon_path) {
    return std::make_unique<LexiconClassifier>(Lexicon::load(*config.lexicon_path));
  }
  std::unique_ptr<LineChannel> channel =
      config.adapter_cmd ? spawn_adapter(*config.adapter_cmd)
                         : connect_adapter_url(*config.adapter_url,
                                               config.adapter.timeout);
  return std::make_unique<ExternalClassifier>(
      std::make_unique<AdapterClient>(std::move(channel), config.adapter));
}

std::string render_stats_json(const PipelineStats& stats) {
  nlohmann::ordered_json doc;
  doc["posts"] = stats.posts;
  doc["sentences"] = stats.sentences;
  doc["mention_sentences"] = stats.mention_sentences;
  doc["mention_records"] = stats.mention_records;
  doc["per_entity"] = nlohmann::ordered_json::object();
  for (const auto& [entity, n] : stats.per_entity) doc["per_entity"][entity] = n;
  return doc.dump(2) + "\n";
}

Analysis analyze(std::span<const LabeledMention> labels,
                 const MetricOptions& metrics, const VerdictOptions& verdict) {
  Analysis a;
  a.counts = bin_weekly(labels);
  a.metrics = compute_metrics(a.counts, metrics);
  if (a.metrics.size() != 2) {
    throw InvalidArgument("prediction needs exactly two entities with mentions, found " +
                          std::to_string(a.metrics.size()));
  }
  a.prediction = predict_winner(trend_verdict(a.metrics[0].profile, verdict),
                                trend_verdict(a.metrics[1].profile, verdict));
  return a;
}

void write_analysis(const Analysis& analysis, const fs::path& dir) {
  emit_counts_csv(analysis.counts, dir / artifacts::kCounts);
  emit_series_csv(collect(analysis.metrics,
                          {&EntityMetrics::trust, &EntityMetrics::distrust}),
                  dir / artifacts::kProportion);
  emit_series_csv(collect(analysis.metrics, {&EntityMetrics::trust_slope}),
                  dir / artifacts::kSlope);
  emit_series_csv(collect(analysis.metrics, {&EntityMetrics::ratio}),
                  dir / artifacts::kRatio);
  emit_series_csv(collect(analysis.metrics, {&EntityMetrics::profile}),
                  dir / artifacts::kProfile);
  write_text_file(dir / artifacts::kPrediction,
                  render_prediction_json(analysis.prediction));
}

void write_charts(const fs::path& series_dir, const fs::path& out_dir,
                  std::span<const EventMarker> events) {
  const std::pair<const char*, ChartKind> charts[] = {
      {artifacts::kProportion, ChartKind::kProportion},
      {artifacts::kSlope, ChartKind::kSlope},
      {artifacts::kProfile, ChartKind::kProfile},
  };
  for (const auto& [file, kind] : charts) {
    auto series = read_series_csv(series_dir / file);
    emit_chart_svg(series, events, kind,
                   out_dir / (std::string(chart_file_stem(kind)) + ".svg"));
  }
}

void write_atomically(const fs::path& target,
                      const std::function<void(const fs::path&)>& body) {
  fs::path absolute = fs::absolute(target);
  fs::path parent = absolute.parent_path();
  std::string name = absolute.filename().string();
  if (name.empty()) {  // trailing slash
    absolute = absolute.parent_path();
    parent = absolute.parent_path();
    name = absolute.filename().string();
  }
  fs::create_directories(parent);
  const std::string suffix = std::to_string(::getpid());
  fs::path staging = parent / ("." + name + ".tmp-" + suffix);
  fs::path backup = parent / ("." + name + ".old-" + suffix);
  fs::remove_all(staging);
  fs::create_directory(staging);
  try {
    body(staging);
  } catch (...) {
    std::error_code ignored;
    fs::remove_all(staging, ignored);
    throw;
  }
  bool had_previous = fs::exists(absolute);
  if (had_previous) fs::rename(absolute, backup);
  try {
    fs::rename(staging, absolute);
  } catch (...) {
    if (had_previous) fs::rename(backup, absolute);
    throw;
  }
  if (had_previous) fs::remove_all(backup);
}

PipelineStats run_pipeline(const RunConfig& config) {
  stage("config", [&] { config.validate(); });
  AliasMap aliases = stage("config", [&] { return load_aliases(config); });
  std::unique_ptr<Classifier> classifier =
      stage("classify", [&] { return make_classifier(config); });

  PipelineStats stats;
  stage("output", [&] {
    write_atomically(config.out_dir, [&](const fs::path& dir) {
      Corpus corpus = stage("ingest", [&] { return ingest_sources(config); });
      stage("ingest", [&] { persist_corpus(corpus, dir / artifacts::kCorpus); });

      stats = pipeline_stats(corpus, aliases);
      auto labels = stage("classify", [&] {
        auto mentions = extract_mentions(corpus, aliases);
        auto out = classify_corpus(mentions, *classifier);
        write_labeled_mentions(out, dir / artifacts::kMentions);
        write_text_file(dir / artifacts::kStats, render_stats_json(stats));
        return out;
      });

      stage("analyze", [&] {
        write_analysis(analyze(labels, config.metrics, config.verdict), dir);
      });
      stage("report", [&] {
        auto events = default_events();
        write_charts(dir, dir, events);
      });
    });
  });
  return stats;
}

}  // namespace trustan
