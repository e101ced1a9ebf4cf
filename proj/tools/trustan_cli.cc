// Command-line front end: ingest, stats, classify, analyze, report, run.
//
// Exit status: 0 on success, 2 on usage errors, 1 when a stage fails.

#include <unistd.h>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trustan/errors.h"
#include "trustan/pipeline.h"
#include "trustan/report.h"

namespace fs = std::filesystem;
using namespace trustan;

namespace {

constexpr int kUsageError = 2;
constexpr int kStageError = 1;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rethrows InvalidArgument from configuration checks as a usage error.
template <typename F>
void check_usage(F&& f) {
  try {
    f();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

struct CliState {
  RunConfig config;
  std::vector<std::string> inputs;
  std::string aliases;
  std::string lexicon;
  std::string adapter_cmd;
  std::string adapter_url;
  std::string out;
  std::string config_file;
  bool strict = true;
  long long seed = 0;  // reserved; the pipeline is deterministic
  double adapter_timeout_s = 60.0;
  long long fetch_timeout_s = 30;
};

void add_input_options(CLI::App* app, CliState& s, const std::string& what) {
  app->add_option("--input", s.inputs, what)->type_name("PATH");
}

void add_ingest_options(CLI::App* app, CliState& s) {
  app->add_option("--fetch-url", s.config.fetch_urls,
                  "Thread URL to download (repeatable)");
  app->add_flag("--strict,!--lenient", s.strict,
                "Fail on malformed records (default) or skip and count them");
  app->add_option("--timeout", s.fetch_timeout_s, "HTTP timeout in seconds")
      ->check(CLI::PositiveNumber);
  app->add_option("--retries", s.config.fetch.retries, "HTTP retry count")
      ->check(CLI::NonNegativeNumber);
}

void add_alias_options(CLI::App* app, CliState& s) {
  app->add_option("--aliases", s.aliases,
                  "Alias map JSON (default: built-in TRUMP/HARRIS map)");
}

void add_classifier_options(CLI::App* app, CliState& s) {
  app->add_option("--lexicon", s.lexicon, "Lexicon JSON for the baseline");
  app->add_option("--adapter-cmd", s.adapter_cmd,
                  "Command speaking trustan-adapter/1 on stdio");
  app->add_option("--adapter-url", s.adapter_url,
                  "HTTP endpoint speaking trustan-adapter/1");
  app->add_option("--batch-size", s.config.adapter.batch_size,
                  "Adapter batch size")
      ->check(CLI::PositiveNumber);
  app->add_option("--adapter-timeout", s.adapter_timeout_s,
                  "Adapter timeout per batch in seconds")
      ->check(CLI::PositiveNumber);
}

void add_metric_options(CLI::App* app, CliState& s) {
  app->add_option("--min-n", s.config.metrics.min_n,
                  "Minimum mentions for a week to be reported");
  app->add_option("--alpha", s.config.metrics.alpha, "Ratio smoothing");
  app->add_option("--window-weeks", s.config.verdict.window_weeks,
                  "Trailing weeks used by the verdict");
  app->add_option("--theta", s.config.verdict.theta,
                  "Stability threshold (profile units per week)");
}

void add_common(CLI::App* app, CliState& s, const std::string& out_help) {
  app->add_option("--out", s.out, out_help)->required();
  app->add_option("--config", s.config_file,
                  "JSON file with the same keys as the flags; flags win");
  app->add_option("--seed", s.seed, "Reserved; unused");
}

// Applies keys from the JSON config file to options not given on the
// command line.
void apply_config_file(CLI::App* app, CliState& s) {
  if (s.config_file.empty()) return;
  nlohmann::json doc = nlohmann::json::parse(read_text_file(s.config_file));
  if (!doc.is_object()) throw CLI::ValidationError("--config", "not a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "strict" || key == "lenient") {
      CLI::Option* flag = app->get_option_no_throw("--strict");
      if (flag == nullptr || !value.is_boolean()) {
        throw CLI::ValidationError("--config", "bad key '" + key + "'");
      }
      if (flag->count() == 0) s.strict = (key == "strict") == value.get<bool>();
      continue;
    }
    CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw CLI::ValidationError("--config", "unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    std::vector<std::string> values;
    auto to_text = [](const nlohmann::json& v) {
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    if (value.is_array()) {
      for (const auto& v : value) values.push_back(to_text(v));
    } else {
      values.push_back(to_text(value));
    }
    for (const auto& v : values) opt->add_result(v);
    opt->run_callback();
  }
}

void finalize(CliState& s) {
  auto& c = s.config;
  c.inputs.assign(s.inputs.begin(), s.inputs.end());
  if (!s.aliases.empty()) c.aliases_path = s.aliases;
  if (!s.lexicon.empty()) c.lexicon_path = s.lexicon;
  if (!s.adapter_cmd.empty()) c.adapter_cmd = s.adapter_cmd;
  if (!s.adapter_url.empty()) c.adapter_url = s.adapter_url;
  c.out_dir = s.out;
  c.strict = s.strict;
  c.adapter.timeout = std::chrono::milliseconds(
      static_cast<long long>(s.adapter_timeout_s * 1000.0));
  c.fetch.timeout = std::chrono::seconds(s.fetch_timeout_s);
}

void write_file_atomically(const fs::path& path,
                           const std::function<void(const fs::path&)>& body) {
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  try {
    body(tmp);
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
  fs::rename(tmp, path);
}

void print_manifest(const Corpus& corpus) {
  for (const auto& e : corpus.manifest()) {
    std::cerr << e.source << ": " << e.post_count << " posts";
    if (e.skipped) std::cerr << ", " << e.skipped << " skipped";
    std::cerr << '\n';
  }
  std::cerr << "corpus: " << corpus.size() << " posts\n";
}

int cmd_ingest(CliState& s) {
  if (s.config.inputs.empty() && s.config.fetch_urls.empty()) {
    throw UsageError("no input: give --input or --fetch-url");
  }
  Corpus corpus = ingest_sources(s.config);
  print_manifest(corpus);
  write_file_atomically(s.config.out_dir, [&](const fs::path& tmp) {
    persist_corpus(corpus, tmp);
  });
  return 0;
}

Corpus load_inputs(const RunConfig& config) {
  if (config.inputs.empty()) throw UsageError("no --input given");
  return load_corpus(config.inputs, LoadOptions{config.strict});
}

int cmd_stats(CliState& s) {
  Corpus corpus = load_inputs(s.config);
  std::string json = render_stats_json(pipeline_stats(corpus, load_aliases(s.config)));
  if (s.config.out_dir == "-") {
    std::cout << json;
  } else {
    write_file_atomically(s.config.out_dir,
                          [&](const fs::path& tmp) { write_text_file(tmp, json); });
  }
  return 0;
}

int cmd_classify(CliState& s) {
  check_usage([&] { s.config.validate_classifier(); });
  Corpus corpus = load_inputs(s.config);
  AliasMap aliases = load_aliases(s.config);
  auto classifier = make_classifier(s.config);
  auto mentions = extract_mentions(corpus, aliases);
  auto labels = classify_corpus(mentions, *classifier);
  write_file_atomically(s.config.out_dir, [&](const fs::path& tmp) {
    write_labeled_mentions(labels, tmp);
  });
  std::cerr << "classified " << labels.size() << " mentions with "
            << classifier->id() << '\n';
  return 0;
}

int cmd_analyze(CliState& s) {
  check_usage([&] { s.config.validate_metrics(); });
  if (s.config.inputs.empty()) throw UsageError("no --input given");
  std::vector<LabeledMention> labels;
  for (const auto& path : s.config.inputs) {
    auto part = read_labeled_mentions(path);
    labels.insert(labels.end(), part.begin(), part.end());
  }
  Analysis analysis = analyze(labels, s.config.metrics, s.config.verdict);
  write_atomically(s.config.out_dir,
                   [&](const fs::path& dir) { write_analysis(analysis, dir); });
  std::cout << "winner: " << analysis.prediction.winner << '\n';
  return 0;
}

int cmd_report(CliState& s) {
  if (s.config.inputs.size() != 1) {
    throw UsageError("report takes exactly one --input directory");
  }
  fs::create_directories(s.config.out_dir);
  auto events = default_events();
  // Stage next to the destination so the renames stay on one filesystem.
  fs::path staging = s.config.out_dir / (".report.tmp-" + std::to_string(::getpid()));
  fs::create_directory(staging);
  try {
    write_charts(s.config.inputs.front(), staging, events);
  } catch (...) {
    fs::remove_all(staging);
    throw;
  }
  for (const auto& entry : fs::directory_iterator(staging)) {
    fs::rename(entry.path(), s.config.out_dir / entry.path().filename());
  }
  fs::remove_all(staging);
  return 0;
}

int cmd_run(CliState& s) {
  check_usage([&] { s.config.validate(); });
  PipelineStats stats = run_pipeline(s.config);
  std::cerr << "posts " << stats.posts << ", sentences " << stats.sentences
            << ", mention sentences " << stats.mention_sentences << '\n';
  std::cout << read_text_file(s.config.out_dir / artifacts::kPrediction);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust analytics: ethotic support/attack mining over threaded discussions"};
  app.require_subcommand(1);
  CliState s;
  std::map<CLI::App*, int (*)(CliState&)> handlers;
  const char* stage_name = "";

  auto* ingest = app.add_subcommand("ingest", "Load/fetch posts into a canonical corpus file");
  add_input_options(ingest, s, "Line-delimited post file (repeatable)");
  add_ingest_options(ingest, s);
  add_common(ingest, s, "Corpus file to write");
  handlers[ingest] = cmd_ingest;

  auto* stats = app.add_subcommand("stats", "Count posts, sentences and mentions");
  add_input_options(stats, s, "Corpus file (repeatable)");
  add_alias_options(stats, s);
  stats->add_flag("--strict,!--lenient", s.strict, "Strict parsing (default)");
  add_common(stats, s, "Stats JSON to write, '-' for stdout");
  handlers[stats] = cmd_stats;

  auto* classify = app.add_subcommand("classify", "Label entity mentions");
  add_input_options(classify, s, "Corpus file (repeatable)");
  add_alias_options(classify, s);
  add_classifier_options(classify, s);
  classify->add_flag("--strict,!--lenient", s.strict, "Strict parsing (default)");
  add_common(classify, s, "Labeled mentions file to write");
  handlers[classify] = cmd_classify;

  auto* analyze_cmd = app.add_subcommand("analyze", "Weekly series, metrics and prediction");
  add_input_options(analyze_cmd, s, "Labeled mentions file (repeatable)");
  add_metric_options(analyze_cmd, s);
  add_common(analyze_cmd, s, "Output directory");
  handlers[analyze_cmd] = cmd_analyze;

  auto* report = app.add_subcommand("report", "Render SVG charts from series CSVs");
  add_input_options(report, s, "Directory holding proportion/slope/profile CSVs");
  add_common(report, s, "Output directory");
  handlers[report] = cmd_report;

  auto* run = app.add_subcommand("run", "Ingest, classify, analyze and report");
  add_input_options(run, s, "Line-delimited post file (repeatable)");
  add_ingest_options(run, s);
  add_alias_options(run, s);
  add_classifier_options(run, s);
  add_metric_options(run, s);
  add_common(run, s, "Output directory");
  handlers[run] = cmd_run;

  CLI::App* selected = nullptr;
  try {
    app.parse(argc, argv);
    selected = app.get_subcommands().front();
    apply_config_file(selected, s);
    finalize(s);
    stage_name = selected->get_name().c_str();
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    return handlers.at(selected)(s);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStageError;
  } catch (const std::exception& e) {
    std::cerr << "error: [" << stage_name << "] " << e.what() << '\n';
    return kStageError;
  }
}
