#include "trustan/corpus.h"

#include <gtest/gtest.h>
#include <json.hpp>
#include <httplib.h>

#include <random>
#include <thread>

#include "test_util.h"
#include "trustan/errors.h"

namespace trustan {
namespace {

using testing::TempDir;
using testing::fixture_dir;
using testing::read_file;
using testing::write_file;

Post make_post(std::string id, const char* ts, std::string body,
               std::string thread = "t", std::string author = "a") {
  return Post{std::move(id), std::move(thread), std::move(author),
              *parse_utc(ts), std::move(body)};
}

std::string line(const Post& p) { return format_post_line(p) + "\n"; }

TEST(LoadCorpus, TwoValidLines) {
  TempDir dir;
  write_file(dir / "a.jsonl",
             line(make_post("p2", "2024-07-01T00:00:00Z", "second")) +
                 line(make_post("p1", "2024-06-01T00:00:00Z", "first")));
  std::vector<std::filesystem::path> paths{dir / "a.jsonl"};
  Corpus c = load_corpus(paths);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.posts()[0].post_id, "p1");  // canonical (created_at, id) order
  ASSERT_EQ(c.manifest().size(), 1u);
  EXPECT_EQ(c.manifest()[0].post_count, 2u);
  EXPECT_EQ(c.manifest()[0].skipped, 0u);
}

TEST(LoadCorpus, EmptyFile) {
  TempDir dir;
  write_file(dir / "empty.jsonl", "");
  std::vector<std::filesystem::path> paths{dir / "empty.jsonl"};
  Corpus c = load_corpus(paths);
  EXPECT_TRUE(c.empty());
  EXPECT_EQ(c.manifest()[0].post_count, 0u);
}

TEST(LoadCorpus, MissingFileNamesPath) {
  std::vector<std::filesystem::path> paths{"/nonexistent/posts.jsonl"};
  try {
    load_corpus(paths);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_EQ(e.path(), "/nonexistent/posts.jsonl");
  }
}

TEST(LoadCorpus, StrictModeReportsFileAndLine) {
  TempDir dir;
  write_file(dir / "bad.jsonl",
             line(make_post("p1", "2024-06-01T00:00:00Z", "ok")) +
                 "{\"post_id\": \"p2\"}\n" +
                 line(make_post("p3", "2024-06-02T00:00:00Z", "ok")));
  std::vector<std::filesystem::path> paths{dir / "bad.jsonl"};
  try {
    load_corpus(paths);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.source(), (dir / "bad.jsonl").string());
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadCorpus, LenientModeSkipsAndCounts) {
  // Three lines, the middle one malformed: hand count gives 2 kept, 1 skipped.
  TempDir dir;
  write_file(dir / "mixed.jsonl",
             line(make_post("p1", "2024-06-01T00:00:00Z", "ok")) +
                 "not json at all\n" +
                 line(make_post("p3", "2024-06-02T00:00:00Z", "ok")));
  testing::WarningCapture warnings;
  std::vector<std::filesystem::path> paths{dir / "mixed.jsonl"};
  Corpus c = load_corpus(paths, LoadOptions{.strict = false});
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.skipped(), 1u);
  EXPECT_EQ(c.manifest()[0].post_count, 2u);
  EXPECT_EQ(warnings.warnings().size(), 1u);
}

TEST(LoadCorpus, RejectsUnparseableTimestampAndMissingKeys) {
  EXPECT_THROW(parse_post_line(R"({"post_id":"x","thread_id":"t","author":"a",)"
                               R"("created_at":"2024-13-01T00:00:00Z","body":""})"),
               ParseError);
  EXPECT_THROW(parse_post_line(R"({"post_id":"x","thread_id":"t","author":"a",)"
                               R"("created_at":"2024-01-01T00:00:00Z"})"),
               ParseError);
  EXPECT_THROW(parse_post_line(R"({"post_id":"x","thread_id":"t","author":null,)"
                               R"("created_at":"2024-01-01T00:00:00Z","body":""})"),
               ParseError);
}

TEST(LoadCorpus, UnknownKeysIgnoredAndEmptyBodyAllowed) {
  Post p = parse_post_line(
      R"({"post_id":"x","thread_id":"t","author":"","created_at":"2024-01-01T00:00:00Z",)"
      R"("body":"","score":12})");
  EXPECT_EQ(p.body, "");
  EXPECT_EQ(p.author, "");
}

TEST(LoadCorpus, OffsetTimestampsAreStoredAsUtc) {
  Post p = parse_post_line(
      R"({"post_id":"x","thread_id":"t","author":"a","created_at":"2024-01-01T01:00:00+01:00","body":"b"})");
  EXPECT_EQ(format_utc(p.created_at), "2024-01-01T00:00:00Z");
}

TEST(CorpusMerge, DuplicateIdsCollapseOrConflict) {
  Post a = make_post("p1", "2024-06-01T00:00:00Z", "same");
  Post b = make_post("p1", "2024-06-01T00:00:00Z", "different");
  Corpus same = Corpus::merge({{"x", {a}, 0}, {"y", {a}, 0}});
  EXPECT_EQ(same.size(), 1u);
  EXPECT_THROW(Corpus::merge({{"x", {a}, 0}, {"y", {b}, 0}}), ParseError);

  testing::WarningCapture warnings;
  Corpus ab = Corpus::merge({{"x", {a}, 0}, {"y", {b}, 0}}, {.strict = false});
  Corpus ba = Corpus::merge({{"y", {b}, 0}, {"x", {a}, 0}}, {.strict = false});
  EXPECT_EQ(ab.posts(), ba.posts());
}

TEST(CorpusMerge, IndependentOfBatchOrder) {
  std::vector<Post> first{make_post("b", "2024-06-02T00:00:00Z", "1"),
                          make_post("a", "2024-06-02T00:00:00Z", "2")};
  std::vector<Post> second{make_post("c", "2024-06-01T00:00:00Z", "3")};
  Corpus x = Corpus::merge({{"1", first, 0}, {"2", second, 0}});
  Corpus y = Corpus::merge({{"2", second, 0}, {"1", first, 0}});
  EXPECT_EQ(x.posts(), y.posts());
  EXPECT_EQ(x.posts()[0].post_id, "c");
  EXPECT_EQ(x.posts()[1].post_id, "a");
}

TEST(PersistCorpus, RoundTripTwoPosts) {
  TempDir dir;
  Corpus c = Corpus::merge({{"mem",
                             {make_post("p1", "2024-06-01T00:00:00Z", "Hello."),
                              make_post("p2", "2024-06-01T00:00:01Z", "")},
                             0}});
  persist_corpus(c, dir / "out.jsonl");
  std::vector<std::filesystem::path> paths{dir / "out.jsonl"};
  Corpus back = load_corpus(paths);
  EXPECT_EQ(back.posts(), c.posts());
  EXPECT_EQ(back.manifest()[0].post_count, c.manifest()[0].post_count);
}

TEST(PersistCorpus, EmptyCorpusGivesEmptyFile) {
  TempDir dir;
  persist_corpus(Corpus{}, dir / "empty.jsonl");
  EXPECT_EQ(read_file(dir / "empty.jsonl"), "");
  std::vector<std::filesystem::path> paths{dir / "empty.jsonl"};
  EXPECT_TRUE(load_corpus(paths).empty());
}

std::string random_utf8(std::mt19937& rng, std::size_t max_len) {
  static const std::vector<std::string> pieces = {
      "a", "Z", " ", "\n", "\t", "\"", "\\", "/", ".", "!", "?", "\x01",
      "\x7f", "é", "ß", "–", "’", "😀", "中", "{", "}", ",", ":"};
  std::string out;
  std::size_t n = rng() % (max_len + 1);
  for (std::size_t i = 0; i < n; ++i) out += pieces[rng() % pieces.size()];
  return out;
}

TEST(PersistCorpus, ThousandRandomPostsRoundTripBitExact) {
  std::mt19937 rng(20241105);
  std::vector<Post> posts;
  for (int i = 0; i < 1000; ++i) {
    Post p;
    p.post_id = "id" + std::to_string(i) + random_utf8(rng, 3);
    p.thread_id = random_utf8(rng, 6);
    p.author = random_utf8(rng, 8);
    p.created_at = Timestamp{std::chrono::seconds{
        1700000000 + static_cast<std::int64_t>(rng() % 40000000)}};
    p.body = random_utf8(rng, 80);
    posts.push_back(std::move(p));
  }
  Corpus c = Corpus::merge({{"generated", posts, 0}});
  TempDir dir;
  persist_corpus(c, dir / "a.jsonl");
  std::vector<std::filesystem::path> paths{dir / "a.jsonl"};
  Corpus back = load_corpus(paths);
  EXPECT_EQ(back.posts(), c.posts());
  EXPECT_EQ(back.manifest()[0].post_count, 1000u);
  persist_corpus(back, dir / "b.jsonl");
  EXPECT_EQ(read_file(dir / "a.jsonl"), read_file(dir / "b.jsonl"));
  // Two loads of the same file are identical.
  EXPECT_EQ(load_corpus(paths).posts(), back.posts());
}

TEST(PersistCorpus, UnwritablePathNamesPath) {
  EXPECT_THROW(persist_corpus(Corpus{}, "/nonexistent/dir/out.jsonl"), IoError);
}

TEST(ThreadDocument, RootWithTwoRepliesFlattensDepthFirst) {
  auto posts = parse_thread_document(read_file(fixture_dir() / "thread_basic.json"));
  ASSERT_EQ(posts.size(), 3u);
  EXPECT_EQ(posts[0].post_id, "t1_c1");
  EXPECT_EQ(posts[1].post_id, "t1_c2");
  EXPECT_EQ(posts[2].post_id, "t1_c3");
  EXPECT_EQ(posts[0].thread_id, "abc123");
  EXPECT_EQ(posts[0].author, "alice");
  EXPECT_EQ(posts[0].body, "Trump is a liar.");
  EXPECT_EQ(format_utc(posts[0].created_at), "2024-06-27T00:00:00Z");
  EXPECT_EQ(format_utc(posts[1].created_at), "2024-06-27T01:00:00Z");
}

TEST(ThreadDocument, SubmissionDeletedAndBodylessNodes) {
  auto posts = parse_thread_document(read_file(fixture_dir() / "thread_full.json"));
  // Hand-flattened: submission, k1, k2 (deleted), k4, k3 (empty), k6.
  // k5 has no body and "more" stubs are not comments.
  std::vector<std::string> ids;
  for (const auto& p : posts) ids.push_back(p.post_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"t3_abc123", "t1_k1", "t1_k2", "t1_k4",
                                           "t1_k3", "t1_k6"}));
  EXPECT_EQ(posts[0].body, "Debate night thread\n\nDiscuss the Harris-Trump debate here.");
  EXPECT_EQ(posts[2].body, "");  // deleted comment kept with empty body
  EXPECT_EQ(posts[4].body, "");
  for (const auto& p : posts) EXPECT_EQ(p.thread_id, "abc123");
}

TEST(ThreadDocument, UnrecognizedShapesAreFatal) {
  EXPECT_THROW(parse_thread_document("{\"hello\": 1}"), ParseError);
  EXPECT_THROW(parse_thread_document("[1, 2]"), ParseError);
  EXPECT_THROW(parse_thread_document("not json"), ParseError);
  EXPECT_THROW(parse_thread_document(
                   R"({"kind":"t1","data":{"id":"x","body":"b"}})"),  // no created_utc
               ParseError);
}

// Flattening conservation over generated trees.
TEST(ThreadDocument, PostCountEqualsBodiedCommentNodes) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    int next_id = 0;
    int bodied = 0;
    std::function<nlohmann::json(int)> make = [&](int depth) {
      nlohmann::json data = {{"id", "n" + std::to_string(next_id++)},
                             {"author", "u"},
                             {"created_utc", 1720000000 + next_id}};
      int roll = rng() % 4;
      if (roll == 0) {
        data["body"] = nullptr;
      } else if (roll == 1) {
        data["body"] = "[deleted]";
        ++bodied;
      } else {
        data["body"] = "text " + std::to_string(next_id);
        ++bodied;
      }
      nlohmann::json children = nlohmann::json::array();
      int n = depth < 4 ? rng() % 3 : 0;
      for (int i = 0; i < n; ++i) children.push_back(make(depth + 1));
      data["replies"] = n ? nlohmann::json{{"kind", "Listing"},
                                           {"data", {{"children", children}}}}
                          : nlohmann::json("");
      return nlohmann::json{{"kind", "t1"}, {"data", data}};
    };
    nlohmann::json roots = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) roots.push_back(make(0));
    nlohmann::json doc = {{"kind", "Listing"}, {"data", {{"children", roots}}}};
    EXPECT_EQ(parse_thread_document(doc.dump()).size(), std::size_t(bodied));
  }
}

// Local HTTP server serving fixture threads and error statuses.
class FetchTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Get("/r/politics/comments/abc123/debate.json",
                [](const httplib::Request& req, httplib::Response& res) {
                  res.set_content(read_file(fixture_dir() / "thread_basic.json"),
                                  "application/json");
                  res.set_header("X-Seen-UA", req.get_header_value("User-Agent"));
                });
    server_.Get("/missing.json", [](const httplib::Request&, httplib::Response& res) {
      res.status = 404;
    });
    server_.Get("/limited.json", [this](const httplib::Request&, httplib::Response& res) {
      if (limited_hits_++ < 2) {
        res.status = 429;
        res.set_header("Retry-After", "7");
      } else {
        res.set_content(read_file(fixture_dir() / "thread_basic.json"),
                        "application/json");
      }
    });
    server_.Get("/down.json", [](const httplib::Request&, httplib::Response& res) {
      res.status = 503;
    });
    server_.Get("/garbage.json", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"weird\": true}", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

  FetchOptions options() {
    FetchOptions o;
    o.timeout = std::chrono::seconds(5);
    o.sleep = [this](std::chrono::milliseconds d) { sleeps_.push_back(d); };
    return o;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int limited_hits_ = 0;
  std::vector<std::chrono::milliseconds> sleeps_;
};

TEST_F(FetchTest, AppendsJsonSuffixAndFlattens) {
  auto posts = fetch_thread(url("/r/politics/comments/abc123/debate/"), options());
  ASSERT_EQ(posts.size(), 3u);
  EXPECT_EQ(posts[2].post_id, "t1_c3");
}

TEST_F(FetchTest, NotFoundIsFatalWithStatus) {
  try {
    fetch_thread(url("/missing"), options());
    FAIL() << "expected FetchError";
  } catch (const FetchError& e) {
    EXPECT_EQ(e.status(), 404);
    EXPECT_FALSE(e.retriable());
  }
  EXPECT_TRUE(sleeps_.empty());
}

TEST_F(FetchTest, RateLimitHonorsRetryAfter) {
  auto posts = fetch_thread(url("/limited.json"), options());
  EXPECT_EQ(posts.size(), 3u);
  ASSERT_EQ(sleeps_.size(), 2u);
  EXPECT_EQ(sleeps_[0], std::chrono::milliseconds(7000));
}

TEST_F(FetchTest, ServerErrorsAreRetriableAfterExhaustion) {
  FetchOptions o = options();
  o.retries = 2;
  try {
    fetch_thread(url("/down.json"), o);
    FAIL() << "expected FetchError";
  } catch (const FetchError& e) {
    EXPECT_EQ(e.status(), 503);
    EXPECT_TRUE(e.retriable());
  }
  EXPECT_EQ(sleeps_.size(), 2u);
}

TEST_F(FetchTest, UnrecognizedDocumentIsParseError) {
  EXPECT_THROW(fetch_thread(url("/garbage.json"), options()), ParseError);
}

TEST_F(FetchTest, NetworkFailureIsRetriable) {
  FetchOptions o = options();
  o.retries = 0;
  o.timeout = std::chrono::seconds(1);
  try {
    fetch_thread("http://127.0.0.1:1/x.json", o);
    FAIL() << "expected FetchError";
  } catch (const FetchError& e) {
    EXPECT_EQ(e.status(), 0);
    EXPECT_TRUE(e.retriable());
  }
}

TEST(Fetch, RejectsNonHttpUrls) {
  EXPECT_THROW(fetch_thread("ftp://example.com/x"), FetchError);
}

}  // namespace
}  // namespace trustan
