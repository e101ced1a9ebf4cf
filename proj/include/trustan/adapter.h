#ifndef TRUSTAN_ADAPTER_H_
#define TRUSTAN_ADAPTER_H_

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trustan/ethos.h"

namespace trustan {

// Client side of the trustan-adapter/1 protocol.
//
// The adapter announces {"protocol": "trustan-adapter/1"} as its first line.
// The client then writes request lines {"id": int, "text": str} followed by
// a blank line; the adapter answers every pending id, in any order, with
// {"id": int, "label": "support"|"attack"|"none", "confidence": float?}.
// Over HTTP each flush group is one POST whose body holds the request lines
// and whose response body holds the announcement followed by the responses.

inline constexpr const char* kAdapterProtocol = "trustan-adapter/1";

enum class ReadStatus { kLine, kTimeout, kClosed };

// Bidirectional line transport to an adapter.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  // line must not contain '\n'. An empty line flushes the batch.
  virtual void write_line(std::string_view line) = 0;
  virtual ReadStatus read_line(std::string* line,
                               std::chrono::milliseconds timeout) = 0;
  virtual std::string describe() const = 0;
};

// Runs command under /bin/sh and talks to it over stdin/stdout. Standard
// error is captured and attached to AdapterFailure when the process exits
// nonzero. SIGPIPE is ignored process-wide once a channel is created.
std::unique_ptr<LineChannel> spawn_adapter(const std::string& command);

// POSTs each flush group to url.
std::unique_ptr<LineChannel> connect_adapter_url(
    const std::string& url, std::chrono::milliseconds timeout);

// In-process adapter: handler receives the request lines of each flush group
// and returns response lines. The announcement is emitted automatically.
class InProcessChannel : public LineChannel {
 public:
  using Handler =
      std::function<std::vector<std::string>(const std::vector<std::string>&)>;

  explicit InProcessChannel(Handler handler,
                            std::string announcement = std::string(
                                R"({"protocol":"trustan-adapter/1"})"));

  void write_line(std::string_view line) override;
  ReadStatus read_line(std::string* line,
                       std::chrono::milliseconds timeout) override;
  std::string describe() const override { return "in-process"; }

 private:
  Handler handler_;
  std::vector<std::string> pending_;
  std::deque<std::string> output_;
};

struct AdapterOptions {
  std::chrono::milliseconds timeout{60'000};  // per batch
  std::size_t batch_size = 64;
};

class AdapterClient {
 public:
  AdapterClient(std::unique_ptr<LineChannel> channel,
                AdapterOptions options = {});

  // Sends one flush group and returns results in input order. Throws
  // ProtocolError for malformed or unknown responses, AdapterTimeout when
  // ids remain unanswered past the deadline, AdapterFailure when the
  // adapter dies. After any error the session is unusable.
  std::vector<LabeledMention> classify_batch(
      std::span<const MentionSentence> batch);

  const AdapterOptions& options() const { return options_; }
  std::string classifier_id() const;

 private:
  void check_announcement(const std::string& line);

  std::unique_ptr<LineChannel> channel_;
  AdapterOptions options_;
  long long next_id_ = 0;
  bool announced_ = false;
  bool broken_ = false;
};

std::vector<LabeledMention> classify_external(
    std::span<const MentionSentence> batch, AdapterClient& adapter);

// Classifier that feeds mentions to an adapter in batches of
// options().batch_size.
class ExternalClassifier : public Classifier {
 public:
  explicit ExternalClassifier(std::unique_ptr<AdapterClient> client)
      : client_(std::move(client)) {}

  std::string id() const override { return client_->classifier_id(); }
  std::vector<LabeledMention> classify(
      std::span<const MentionSentence> mentions) override;

 private:
  std::unique_ptr<AdapterClient> client_;
};

}  // namespace trustan

#endif  // TRUSTAN_ADAPTER_H_
