#include "trustan/corpus.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <tuple>

#include <json.hpp>

#include "trustan/errors.h"
#include "trustan/logging.h"

namespace trustan {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kPostKeys[] = {"post_id", "thread_id", "author",
                                     "created_at", "body"};

bool canonical_less(const Post& a, const Post& b) {
  return std::tie(a.created_at, a.post_id) < std::tie(b.created_at, b.post_id);
}

bool content_less(const Post& a, const Post& b) {
  return std::tie(a.thread_id, a.author, a.created_at, a.body) <
         std::tie(b.thread_id, b.author, b.created_at, b.body);
}

Timestamp now_seconds() {
  return std::chrono::floor<std::chrono::seconds>(
      std::chrono::system_clock::now());
}

}  // namespace

std::size_t Corpus::skipped() const {
  std::size_t total = 0;
  for (const auto& entry : manifest_) total += entry.skipped;
  return total;
}

Corpus Corpus::merge(std::vector<SourceBatch> batches,
                     const LoadOptions& options) {
  Corpus corpus;
  std::map<std::string, Post> by_id;
  Timestamp ingested = now_seconds();
  for (auto& batch : batches) {
    corpus.manifest_.push_back(
        {batch.source, batch.posts.size(), batch.skipped, ingested});
    for (auto& post : batch.posts) {
      auto [it, inserted] = by_id.try_emplace(post.post_id, post);
      if (inserted || it->second == post) continue;
      if (options.strict) {
        throw ParseError(batch.source, 0,
                         "conflicting duplicate post_id '" + post.post_id +
                             "'");
      }
      warn("conflicting duplicate post_id '" + post.post_id + "' in " +
           batch.source);
      if (content_less(post, it->second)) it->second = std::move(post);
    }
  }
  corpus.posts_.reserve(by_id.size());
  for (auto& [id, post] : by_id) corpus.posts_.push_back(std::move(post));
  std::sort(corpus.posts_.begin(), corpus.posts_.end(), canonical_less);
  return corpus;
}

std::string format_post_line(const Post& post) {
  ordered_json record;
  record["post_id"] = post.post_id;
  record["thread_id"] = post.thread_id;
  record["author"] = post.author;
  record["created_at"] = format_utc(post.created_at);
  record["body"] = post.body;
  return record.dump(-1, ' ', false, json::error_handler_t::strict);
}

Post parse_post_line(std::string_view line, const std::string& source,
                     std::size_t line_number) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(source, line_number, std::string("invalid JSON: ") +
                                              e.what());
  }
  if (!record.is_object()) {
    throw ParseError(source, line_number, "record is not a JSON object");
  }
  for (const char* key : kPostKeys) {
    auto it = record.find(key);
    if (it == record.end()) {
      throw ParseError(source, line_number,
                       std::string("missing key '") + key + "'");
    }
    if (!it->is_string()) {
      throw ParseError(source, line_number,
                       std::string("key '") + key + "' is not a string");
    }
  }
  Post post;
  post.post_id = record["post_id"].get<std::string>();
  post.thread_id = record["thread_id"].get<std::string>();
  post.author = record["author"].get<std::string>();
  post.body = record["body"].get<std::string>();
  if (post.post_id.empty()) {
    throw ParseError(source, line_number, "empty post_id");
  }
  const auto& created = record["created_at"].get_ref<const std::string&>();
  auto ts = parse_utc(created);
  if (!ts) {
    throw ParseError(source, line_number,
                     "unparseable created_at '" + created + "'");
  }
  post.created_at = *ts;
  return post;
}

SourceBatch read_post_file(const std::filesystem::path& path,
                           const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open input file");
  SourceBatch batch;
  batch.source = path.string();
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      batch.posts.push_back(parse_post_line(line, batch.source, line_number));
    } catch (const ParseError& e) {
      if (options.strict) throw;
      warn(std::string("skipping ") + e.what());
      ++batch.skipped;
    }
  }
  if (in.bad()) throw IoError(path.string(), "read failed");
  return batch;
}

Corpus load_corpus(std::span<const std::filesystem::path> paths,
                   const LoadOptions& options) {
  std::vector<SourceBatch> batches;
  batches.reserve(paths.size());
  for (const auto& path : paths) {
    batches.push_back(read_post_file(path, options));
  }
  return Corpus::merge(std::move(batches), options);
}

void persist_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  for (const auto& post : corpus.posts()) {
    out << format_post_line(post) << '\n';
  }
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

// ---------------------------------------------------------------------------
// Thread documents

namespace {

class ThreadFlattener {
 public:
  explicit ThreadFlattener(std::string source) : source_(std::move(source)) {}

  void visit_document(const json& doc) {
    if (doc.is_array()) {
      for (const auto& element : doc) visit_listing(element);
    } else if (is_kind(doc, "Listing")) {
      visit_listing(doc);
    } else if (doc.is_object() && doc.contains("kind") &&
               doc.contains("data")) {
      visit_thing(doc);
    } else {
      fail("unrecognized thread document shape");
    }
  }

  std::vector<Post> take() { return std::move(posts_); }

 private:
  static bool is_kind(const json& node, std::string_view kind) {
    if (!node.is_object()) return false;
    auto it = node.find("kind");
    return it != node.end() && it->is_string() &&
           it->get_ref<const std::string&>() == kind;
  }

  [[noreturn]] void fail(const std::string& reason) const {
    throw ParseError(source_, 0, reason);
  }

  void visit_listing(const json& listing) {
    if (!is_kind(listing, "Listing")) fail("expected a Listing object");
    const json* data = find_object(listing, "data");
    if (data == nullptr) fail("Listing without data object");
    auto children = data->find("children");
    if (children == data->end() || !children->is_array()) {
      fail("Listing without children array");
    }
    for (const auto& child : *children) visit_thing(child);
  }

  void visit_thing(const json& thing) {
    if (!thing.is_object() || !thing.contains("kind")) {
      fail("child is not a kind/data object");
    }
    if (is_kind(thing, "more")) return;
    const json* data = find_object(thing, "data");
    if (data == nullptr) fail("thing without data object");
    if (is_kind(thing, "t3")) {
      visit_submission(*data);
    } else if (is_kind(thing, "t1")) {
      visit_comment(*data);
    } else {
      fail("unsupported thing kind " + thing["kind"].dump());
    }
  }

  void visit_submission(const json& data) {
    std::string id = require_string(data, "id");
    thread_id_ = id;
    Post post;
    post.post_id = "t3_" + id;
    post.thread_id = id;
    post.author = optional_string(data, "author");
    post.created_at = created_of(data);
    std::string title = optional_string(data, "title");
    std::string text = normalize_body(optional_string(data, "selftext"));
    post.body = text.empty() ? title : title + "\n\n" + text;
    posts_.push_back(std::move(post));
  }

  void visit_comment(const json& data) {
    std::string id = require_string(data, "id");
    std::string thread = thread_id_;
    std::string link = optional_string(data, "link_id");
    if (!link.empty()) thread = link.rfind("t3_", 0) == 0 ? link.substr(3) : link;

    auto body = data.find("body");
    if (body != data.end() && !body->is_null()) {
      if (!body->is_string()) fail("comment " + id + " body is not a string");
      Post post;
      post.post_id = "t1_" + id;
      post.thread_id = thread;
      post.author = optional_string(data, "author");
      post.created_at = created_of(data);
      post.body = normalize_body(body->get<std::string>());
      posts_.push_back(std::move(post));
    }

    auto replies = data.find("replies");
    if (replies != data.end() && replies->is_object()) {
      visit_listing(*replies);
    }
  }

  static const json* find_object(const json& node, const char* key) {
    auto it = node.find(key);
    if (it == node.end() || !it->is_object()) return nullptr;
    return &*it;
  }

  std::string require_string(const json& data, const char* key) const {
    auto it = data.find(key);
    if (it == data.end() || !it->is_string() ||
        it->get_ref<const std::string&>().empty()) {
      fail(std::string("thing without string '") + key + "'");
    }
    return it->get<std::string>();
  }

  static std::string optional_string(const json& data, const char* key) {
    auto it = data.find(key);
    if (it == data.end() || !it->is_string()) return {};
    return it->get<std::string>();
  }

  Timestamp created_of(const json& data) const {
    for (const char* key : {"created_utc", "created"}) {
      auto it = data.find(key);
      if (it != data.end() && it->is_number()) {
        return from_epoch_seconds(it->get<double>());
      }
    }
    fail("thing without numeric created_utc");
  }

  static std::string normalize_body(std::string body) {
    if (body == "[deleted]" || body == "[removed]") return {};
    return body;
  }

  std::string source_;
  std::string thread_id_;
  std::vector<Post> posts_;
};

}  // namespace

std::vector<Post> parse_thread_document(std::string_view text,
                                        const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, std::string("invalid JSON: ") + e.what());
  }
  ThreadFlattener flattener(source);
  flattener.visit_document(doc);
  std::vector<Post> posts = flattener.take();
  // Same validation path as canonical files.
  for (auto& post : posts) post = parse_post_line(format_post_line(post), source);
  return posts;
}

}  // namespace trustan
