#include "trustan/pipeline.h"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdio>

#include "test_util.h"
#include "trustan/errors.h"
#include "trustan/report.h"

namespace trustan {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;
using testing::WarningCapture;
using testing::data_dir;
using testing::read_file;
using testing::write_file;

const fs::path kGoldenDir = TRUSTAN_GOLDEN_DIR;

RunConfig demo_config(const fs::path& out) {
  RunConfig config;
  config.inputs = {data_dir() / "demo_corpus.jsonl"};
  config.aliases_path = data_dir() / "aliases.json";
  config.lexicon_path = data_dir() / "lexicon.json";
  config.out_dir = out;
  return config;
}

struct Result {
  int status;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Result cli(const std::string& args) {
  std::string command = std::string(TRUSTAN_CLI) + " " + args + " 2>&1";
  FILE* pipe = ::popen(command.c_str(), "r");
  std::string out;
  char buffer[4096];
  while (std::size_t n = std::fread(buffer, 1, sizeof buffer, pipe)) out.append(buffer, n);
  int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename());
  std::sort(names.begin(), names.end());
  return names;
}

TEST(RunConfig, Validation) {
  RunConfig config = demo_config("/tmp/x");
  EXPECT_NO_THROW(config.validate());
  auto none = config;
  none.lexicon_path.reset();
  EXPECT_THROW(none.validate(), InvalidArgument);
  auto two = config;
  two.adapter_cmd = "cat";
  EXPECT_THROW(two.validate(), InvalidArgument);
  auto bad = config;
  bad.metrics.min_n = 0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = config;
  bad.metrics.alpha = -1;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = config;
  bad.verdict.window_weeks = 1;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = config;
  bad.verdict.theta = -0.1;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = config;
  bad.inputs.clear();
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(RunPipeline, DemoArtifacts) {
  TempDir dir;
  WarningCapture capture;
  auto stats = run_pipeline(demo_config(dir / "out"));
  EXPECT_EQ(stats.posts, 12u);
  EXPECT_EQ(listing(dir / "out"),
            (std::vector<std::string>{"chart_profile.svg", "chart_proportion.svg",
                                      "chart_slope.svg", "corpus.jsonl", "counts.csv",
                                      "mentions.jsonl", "prediction.json", "profile.csv",
                                      "proportion.csv", "ratio.csv", "slope.csv",
                                      "stats.json"}));
  EXPECT_EQ(read_file(dir / "out" / "counts.csv"), read_file(kGoldenDir / "demo_counts.csv"));
  EXPECT_EQ(read_file(dir / "out" / "prediction.json"),
            read_file(kGoldenDir / "demo_prediction.json"));
  auto prediction = nlohmann::json::parse(read_file(dir / "out" / "prediction.json"));
  EXPECT_EQ(prediction["verdicts"].size(), 2u);

  auto labels = read_labeled_mentions(dir / "out" / "mentions.jsonl");
  EXPECT_EQ(labels.size(), stats.mention_records);
  std::uint64_t total = 0;
  for (const auto& c : read_counts_csv(dir / "out" / "counts.csv")) total += c.n_total();
  EXPECT_EQ(total, labels.size());
}

TEST(RunPipeline, RerunIsByteIdentical) {
  TempDir dir;
  WarningCapture capture;
  run_pipeline(demo_config(dir / "a"));
  run_pipeline(demo_config(dir / "b"));
  auto names = listing(dir / "a");
  ASSERT_EQ(names, listing(dir / "b"));
  for (const auto& name : names) {
    EXPECT_EQ(read_file(dir / "a" / name), read_file(dir / "b" / name)) << name;
  }
  // Rerunning onto an existing directory replaces it wholesale.
  write_file(dir / "a" / "stale.txt", "x");
  run_pipeline(demo_config(dir / "a"));
  EXPECT_EQ(listing(dir / "a"), names);
}

TEST(RunPipeline, FailureLeavesNoPartialOutput) {
  TempDir dir;
  write_file(dir / "one_entity.jsonl",
             R"({"post_id":"p1","thread_id":"t","author":"a","created_at":"2024-07-01T00:00:00Z","body":"Trump is honest."})"
             "\n");
  auto config = demo_config(dir / "out");
  config.inputs = {dir / "one_entity.jsonl"};
  try {
    run_pipeline(config);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "analyze");
    EXPECT_EQ(std::string(e.what()).rfind("[analyze] ", 0), 0u);
  }
  EXPECT_FALSE(fs::exists(dir / "out"));
  EXPECT_EQ(listing(dir.path()), std::vector<std::string>{"one_entity.jsonl"});

  // An existing output directory survives a failed run untouched.
  fs::create_directory(dir / "out");
  write_file(dir / "out" / "keep.txt", "old");
  EXPECT_THROW(run_pipeline(config), StageError);
  EXPECT_EQ(read_file(dir / "out" / "keep.txt"), "old");
  EXPECT_EQ(listing(dir.path()).size(), 2u);
}

TEST(RunPipeline, StrictParseFailureNamesIngest) {
  TempDir dir;
  write_file(dir / "bad.jsonl", "{not json\n");
  auto config = demo_config(dir / "out");
  config.inputs.push_back(dir / "bad.jsonl");
  try {
    run_pipeline(config);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "ingest");
    EXPECT_NE(std::string(e.what()).find("bad.jsonl:1"), std::string::npos);
  }
  config.strict = false;
  WarningCapture capture;
  EXPECT_NO_THROW(run_pipeline(config));
  EXPECT_FALSE(capture.warnings().empty());
}

TEST(RunPipeline, AdapterClassifier) {
  TempDir dir;
  auto config = demo_config(dir / "out");
  config.lexicon_path.reset();
  config.adapter_cmd = std::string(TRUSTAN_ECHO_ADAPTER) + " --label none";
  config.adapter.batch_size = 5;
  WarningCapture capture;
  run_pipeline(config);
  auto labels = read_labeled_mentions(dir / "out" / "mentions.jsonl");
  ASSERT_FALSE(labels.empty());
  for (const auto& l : labels) EXPECT_EQ(l.label, EthosLabel::kNone);
  EXPECT_EQ(labels.front().classifier_id, "adapter:" + *config.adapter_cmd);

  config.adapter_cmd = std::string(TRUSTAN_ECHO_ADAPTER) + " --fail 4";
  config.out_dir = dir / "failed";
  try {
    run_pipeline(config);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "classify");
  }
  EXPECT_FALSE(fs::exists(dir / "failed"));
}

TEST(Cli, RunMatchesLibrary) {
  TempDir dir;
  auto demo = (data_dir() / "demo_corpus.jsonl").string();
  auto lexicon = (data_dir() / "lexicon.json").string();
  auto r = cli("run --input " + demo + " --lexicon " + lexicon + " --out " +
               (dir / "cli").string());
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("\"winner\""), std::string::npos);
  EXPECT_EQ(read_file(dir / "cli" / "counts.csv"), read_file(kGoldenDir / "demo_counts.csv"));
  EXPECT_EQ(read_file(dir / "cli" / "prediction.json"),
            read_file(kGoldenDir / "demo_prediction.json"));
}

TEST(Cli, StagedSubcommandsAgreeWithRun) {
  TempDir dir;
  auto demo = (data_dir() / "demo_corpus.jsonl").string();
  auto lexicon = (data_dir() / "lexicon.json").string();
  auto d = [&](const char* name) { return (dir / name).string(); };
  ASSERT_EQ(cli("ingest --input " + demo + " --out " + d("corpus.jsonl")).status, 0);
  auto stats = cli("stats --input " + d("corpus.jsonl") + " --out -");
  ASSERT_EQ(stats.status, 0) << stats.out;
  EXPECT_EQ(nlohmann::json::parse(stats.out)["posts"], 12);
  ASSERT_EQ(cli("classify --input " + d("corpus.jsonl") + " --lexicon " + lexicon +
                " --out " + d("mentions.jsonl")).status, 0);
  ASSERT_EQ(cli("analyze --input " + d("mentions.jsonl") + " --out " + d("analysis")).status, 0);
  ASSERT_EQ(cli("report --input " + d("analysis") + " --out " + d("analysis")).status, 0);
  ASSERT_EQ(cli("run --input " + demo + " --lexicon " + lexicon + " --out " + d("run")).status, 0);
  for (const char* name : {"counts.csv", "proportion.csv", "slope.csv", "ratio.csv",
                           "profile.csv", "prediction.json", "chart_profile.svg"}) {
    EXPECT_EQ(read_file(dir / "analysis" / name), read_file(dir / "run" / name)) << name;
  }
  EXPECT_EQ(read_file(dir / "corpus.jsonl"), read_file(dir / "run" / "corpus.jsonl"));
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  auto demo = (data_dir() / "demo_corpus.jsonl").string();
  auto out = (dir / "out").string();

  auto no_classifier = cli("run --input " + demo + " --out " + out);
  EXPECT_EQ(no_classifier.status, 2) << no_classifier.out;
  EXPECT_FALSE(fs::exists(dir / "out"));

  EXPECT_EQ(cli("run --input " + demo + " --lexicon x --adapter-cmd cat --out " + out).status, 2);
  EXPECT_EQ(cli("run --bogus").status, 2);
  EXPECT_EQ(cli("").status, 2);
  EXPECT_EQ(cli("analyze --input x --window-weeks 1 --out " + out).status, 2);

  auto missing = cli("run --input " + (dir / "nope.jsonl").string() + " --lexicon " +
                     (data_dir() / "lexicon.json").string() + " --out " + out);
  EXPECT_EQ(missing.status, 1);
  EXPECT_NE(missing.out.find("[ingest]"), std::string::npos) << missing.out;
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, ConfigFileWithFlagOverride) {
  TempDir dir;
  nlohmann::json config = {{"input", {(data_dir() / "demo_corpus.jsonl").string()}},
                           {"lexicon", (data_dir() / "lexicon.json").string()},
                           {"window-weeks", 1}};
  write_file(dir / "config.json", config.dump());
  auto bad = cli("run --config " + (dir / "config.json").string() + " --out " +
                 (dir / "a").string());
  EXPECT_EQ(bad.status, 2) << bad.out;
  auto good = cli("run --config " + (dir / "config.json").string() +
                  " --window-weeks 3 --out " + (dir / "b").string());
  ASSERT_EQ(good.status, 0) << good.out;
  EXPECT_EQ(nlohmann::json::parse(read_file(dir / "b" / "prediction.json"))["window_weeks"], 3);
}

}  // namespace
}  // namespace trustan
