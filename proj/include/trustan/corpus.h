#ifndef TRUSTAN_CORPUS_H_
#define TRUSTAN_CORPUS_H_

#include <chrono>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trustan/timeutil.h"

namespace trustan {

// One social-media contribution. Submissions and comments share this shape.
struct Post {
  std::string post_id;
  std::string thread_id;
  std::string author;
  Timestamp created_at;
  std::string body;

  friend bool operator==(const Post&, const Post&) = default;
};

struct SourceEntry {
  std::string source;       // file path or URL
  std::size_t post_count;   // records accepted from this source
  std::size_t skipped;      // malformed records dropped in lenient mode
  Timestamp ingested_at;
};

// Posts gathered from one source, before merging.
struct SourceBatch {
  std::string source;
  std::vector<Post> posts;
  std::size_t skipped = 0;
};

struct LoadOptions {
  bool strict = true;
};

// Immutable, canonically ordered collection of posts keyed by post_id.
class Corpus {
 public:
  Corpus() = default;

  // Merges batches as a set union followed by the (created_at, post_id)
  // sort, so the result does not depend on batch order. A post_id seen
  // twice with identical content collapses to one post; conflicting
  // content is an error in strict mode and keeps the first-sorted record
  // otherwise.
  static Corpus merge(std::vector<SourceBatch> batches,
                      const LoadOptions& options = {});

  const std::vector<Post>& posts() const { return posts_; }
  const std::vector<SourceEntry>& manifest() const { return manifest_; }
  std::size_t size() const { return posts_.size(); }
  bool empty() const { return posts_.empty(); }

  // Total records skipped across all sources.
  std::size_t skipped() const;

 private:
  std::vector<Post> posts_;
  std::vector<SourceEntry> manifest_;
};

// Canonical line format: one JSON object per line with keys post_id,
// thread_id, author, created_at, body, in that order.
std::string format_post_line(const Post& post);
// Throws ParseError (with source and line) on malformed records.
Post parse_post_line(std::string_view line, const std::string& source = "",
                     std::size_t line_number = 0);

// Reads line-delimited post files. Missing files throw IoError; malformed
// lines throw ParseError in strict mode and are counted as skipped in
// lenient mode. Blank lines are ignored.
SourceBatch read_post_file(const std::filesystem::path& path,
                           const LoadOptions& options = {});
Corpus load_corpus(std::span<const std::filesystem::path> paths,
                   const LoadOptions& options = {});

// Writes the corpus in canonical order. Throws IoError.
void persist_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Flattens a public thread document (the ".json" form of a discussion: an
// array of listings, a single listing, or a single thing) depth-first
// into posts. The submission becomes a post whose body is its title and
// self text; each comment becomes a post. Deleted or removed bodies are
// kept as empty bodies. Throws ParseError on unrecognized shapes.
std::vector<Post> parse_thread_document(std::string_view json,
                                        const std::string& source = "");

struct FetchOptions {
  std::chrono::seconds timeout{30};
  int retries = 3;
  // Empty means: read TRUSTAN_USER_AGENT, falling back to a built-in string.
  std::string user_agent;
  // Injected so tests can observe backoff without sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;
};

// Environment variable consulted for the HTTP user agent.
inline constexpr const char* kUserAgentEnv = "TRUSTAN_USER_AGENT";

// Downloads and flattens a thread. Appends ".json" to the path when absent.
// Non-2xx statuses and network failures throw FetchError; 429 and 5xx are
// retried up to options.retries times, honoring Retry-After.
std::vector<Post> fetch_thread(const std::string& url,
                               const FetchOptions& options = {});

}  // namespace trustan

#endif  // TRUSTAN_CORPUS_H_
