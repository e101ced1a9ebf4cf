#include "trustan/adapter.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <map>
#include <mutex>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "trustan/errors.h"

extern char** environ;

namespace trustan {
namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::string describe_wait_status(int status) {
  if (WIFEXITED(status)) return "exit status " + std::to_string(WEXITSTATUS(status));
  if (WIFSIGNALED(status)) return "signal " + std::to_string(WTERMSIG(status));
  return "status " + std::to_string(status);
}

class SubprocessChannel : public LineChannel {
 public:
  explicit SubprocessChannel(std::string command) : command_(std::move(command)) {
    ignore_sigpipe();
    int in_pipe[2], out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0) {
      throw AdapterFailure("cannot create pipes for adapter", std::strerror(errno));
    }
    char stderr_template[] = "/tmp/trustan-adapter-XXXXXX";
    stderr_fd_ = ::mkostemp(stderr_template, O_CLOEXEC);
    if (stderr_fd_ >= 0) ::unlink(stderr_template);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    if (stderr_fd_ >= 0) {
      posix_spawn_file_actions_adddup2(&actions, stderr_fd_, STDERR_FILENO);
    }
    const char* argv[] = {"/bin/sh", "-c", command_.c_str(), nullptr};
    int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, nullptr,
                           const_cast<char* const*>(argv), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    if (rc != 0) {
      close_fds();
      throw AdapterFailure("cannot start adapter '" + command_ + "'",
                           std::strerror(rc));
    }
  }

  ~SubprocessChannel() override {
    if (to_child_ >= 0) {
      ::close(to_child_);
      to_child_ = -1;
    }
    if (pid_ > 0 && !reaped_) {
      auto deadline = Clock::now() + std::chrono::seconds(2);
      while (Clock::now() < deadline) {
        if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
          reaped_ = true;
          break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
      if (!reaped_) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, nullptr, 0);
      }
    }
    close_fds();
  }

  void write_line(std::string_view line) override {
    std::string data(line);
    data.push_back('\n');
    std::size_t written = 0;
    while (written < data.size()) {
      ssize_t n = ::write(to_child_, data.data() + written, data.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        if (errno == EPIPE) fail_on_exit();
        throw AdapterFailure("write to adapter failed", std::strerror(errno));
      }
      written += static_cast<std::size_t>(n);
    }
  }

  ReadStatus read_line(std::string* line,
                       std::chrono::milliseconds timeout) override {
    auto deadline = Clock::now() + timeout;
    for (;;) {
      auto newline = buffer_.find('\n');
      if (newline != std::string::npos) {
        *line = buffer_.substr(0, newline);
        if (!line->empty() && line->back() == '\r') line->pop_back();
        buffer_.erase(0, newline + 1);
        return ReadStatus::kLine;
      }
      if (eof_) {
        fail_on_exit();
        if (!buffer_.empty()) {
          *line = std::move(buffer_);
          buffer_.clear();
          return ReadStatus::kLine;
        }
        return ReadStatus::kClosed;
      }
      auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - Clock::now());
      if (remaining.count() <= 0) return ReadStatus::kTimeout;
      pollfd pfd{from_child_, POLLIN, 0};
      int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw AdapterFailure("poll on adapter failed", std::strerror(errno));
      }
      if (ready == 0) return ReadStatus::kTimeout;
      char chunk[4096];
      ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw AdapterFailure("read from adapter failed", std::strerror(errno));
      }
      if (n == 0) {
        eof_ = true;
      } else {
        buffer_.append(chunk, static_cast<std::size_t>(n));
      }
    }
  }

  std::string describe() const override { return command_; }

 private:
  // Reaps the child; throws when it exited unsuccessfully.
  void fail_on_exit() {
    if (!reaped_) {
      int status = 0;
      while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
      }
      reaped_ = true;
      exit_status_ = status;
    }
    if (!(WIFEXITED(exit_status_) && WEXITSTATUS(exit_status_) == 0)) {
      throw AdapterFailure("adapter '" + command_ + "' terminated with " +
                               describe_wait_status(exit_status_),
                           captured_stderr());
    }
  }

  std::string captured_stderr() const {
    if (stderr_fd_ < 0) return {};
    std::string out;
    char chunk[4096];
    off_t offset = 0;
    ssize_t n;
    while ((n = ::pread(stderr_fd_, chunk, sizeof(chunk), offset)) > 0 &&
           out.size() < 64 * 1024) {
      out.append(chunk, static_cast<std::size_t>(n));
      offset += n;
    }
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) {
      out.pop_back();
    }
    return out;
  }

  void close_fds() {
    for (int* fd : {&to_child_, &from_child_, &stderr_fd_}) {
      if (*fd >= 0) ::close(*fd);
      *fd = -1;
    }
  }

  std::string command_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  int stderr_fd_ = -1;
  std::string buffer_;
  bool eof_ = false;
  bool reaped_ = false;
  int exit_status_ = 0;
};

class HttpChannel : public LineChannel {
 public:
  HttpChannel(const std::string& url, std::chrono::milliseconds timeout)
      : url_(url) {
    static const std::regex kUrl(R"(^(https?://[^/?#]+)([^#]*)$)",
                                 std::regex::icase);
    std::smatch m;
    if (!std::regex_match(url, m, kUrl)) {
      throw InvalidArgument("adapter URL is not http(s): " + url);
    }
    client_ = std::make_unique<httplib::Client>(m[1].str());
    path_ = m[2].str().empty() ? "/" : m[2].str();
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    client_->set_connection_timeout(secs);
    client_->set_read_timeout(secs);
  }

  void write_line(std::string_view line) override {
    if (!line.empty()) {
      body_.append(line);
      body_.push_back('\n');
      return;
    }
    body_.push_back('\n');
    auto res = client_->Post(path_, body_, "application/x-ndjson");
    body_.clear();
    if (!res) {
      throw AdapterTimeout("adapter " + url_ + " unreachable: " +
                           httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
      throw AdapterFailure(
          "adapter " + url_ + " returned HTTP " + std::to_string(res->status),
          res->body);
    }
    std::size_t start = 0;
    bool first = true;
    while (start < res->body.size()) {
      auto end = res->body.find('\n', start);
      if (end == std::string::npos) end = res->body.size();
      std::string line_text = res->body.substr(start, end - start);
      if (!line_text.empty() && line_text.back() == '\r') line_text.pop_back();
      start = end + 1;
      if (line_text.empty()) continue;
      // Every response repeats the announcement; only the first is surfaced.
      if (first && announced_) {
        first = false;
        continue;
      }
      first = false;
      announced_ = true;
      lines_.push_back(std::move(line_text));
    }
  }

  ReadStatus read_line(std::string* line, std::chrono::milliseconds) override {
    if (lines_.empty()) return ReadStatus::kClosed;
    *line = std::move(lines_.front());
    lines_.pop_front();
    return ReadStatus::kLine;
  }

  std::string describe() const override { return url_; }

 private:
  std::string url_;
  std::string path_;
  std::unique_ptr<httplib::Client> client_;
  std::string body_;
  std::deque<std::string> lines_;
  bool announced_ = false;
};

}  // namespace

std::unique_ptr<LineChannel> spawn_adapter(const std::string& command) {
  return std::make_unique<SubprocessChannel>(command);
}

std::unique_ptr<LineChannel> connect_adapter_url(
    const std::string& url, std::chrono::milliseconds timeout) {
  return std::make_unique<HttpChannel>(url, timeout);
}

InProcessChannel::InProcessChannel(Handler handler, std::string announcement)
    : handler_(std::move(handler)) {
  if (!announcement.empty()) output_.push_back(std::move(announcement));
}

void InProcessChannel::write_line(std::string_view line) {
  if (!line.empty()) {
    pending_.emplace_back(line);
    return;
  }
  auto responses = handler_(pending_);
  pending_.clear();
  for (auto& r : responses) output_.push_back(std::move(r));
}

ReadStatus InProcessChannel::read_line(std::string* line,
                                       std::chrono::milliseconds) {
  if (output_.empty()) return ReadStatus::kTimeout;
  *line = std::move(output_.front());
  output_.pop_front();
  return ReadStatus::kLine;
}

AdapterClient::AdapterClient(std::unique_ptr<LineChannel> channel,
                             AdapterOptions options)
    : channel_(std::move(channel)), options_(options) {
  if (options_.batch_size == 0) {
    throw InvalidArgument("adapter batch size must be positive");
  }
}

std::string AdapterClient::classifier_id() const {
  return "adapter:" + channel_->describe();
}

void AdapterClient::check_announcement(const std::string& line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error&) {
    throw ProtocolError("adapter announcement is not JSON: " + line);
  }
  if (!doc.is_object() || !doc.contains("protocol") ||
      doc["protocol"] != kAdapterProtocol) {
    throw ProtocolError(std::string("adapter does not speak ") +
                        kAdapterProtocol + ": " + line);
  }
  announced_ = true;
}

std::vector<LabeledMention> AdapterClient::classify_batch(
    std::span<const MentionSentence> batch) {
  if (broken_) throw ProtocolError("adapter session is no longer usable");
  if (batch.empty()) return {};
  broken_ = true;  // cleared on success

  std::map<long long, std::size_t> pending;  // id -> position
  for (std::size_t i = 0; i < batch.size(); ++i) {
    long long id = next_id_++;
    pending.emplace(id, i);
    json request = {{"id", id}, {"text", batch[i].sentence.text}};
    channel_->write_line(request.dump(-1, ' ', false,
                                      json::error_handler_t::replace));
  }
  channel_->write_line("");

  std::vector<std::optional<LabeledMention>> results(batch.size());
  const std::string classifier = classifier_id();
  auto deadline = Clock::now() + options_.timeout;
  while (!pending.empty() || !announced_) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Clock::now());
    std::string line;
    ReadStatus status =
        remaining.count() > 0 ? channel_->read_line(&line, remaining)
                              : ReadStatus::kTimeout;
    if (status != ReadStatus::kLine) {
      std::string ids;
      for (const auto& [id, pos] : pending) {
        if (!ids.empty()) ids += ",";
        ids += std::to_string(id);
        if (ids.size() > 200) {
          ids += ",...";
          break;
        }
      }
      if (!announced_) ids = "protocol announcement";
      if (status == ReadStatus::kTimeout) {
        throw AdapterTimeout("adapter " + channel_->describe() +
                             " gave no response for " + ids + " within " +
                             std::to_string(options_.timeout.count()) + " ms");
      }
      throw AdapterFailure("adapter " + channel_->describe() +
                               " closed without answering " + ids,
                           "");
    }
    if (line.empty()) continue;
    if (!announced_) {
      check_announcement(line);
      continue;
    }

    json response;
    try {
      response = json::parse(line);
    } catch (const json::parse_error&) {
      throw ProtocolError("adapter response is not JSON: " + line);
    }
    if (!response.is_object()) {
      throw ProtocolError("adapter response is not an object: " + line);
    }
    if (response.contains("error")) {
      throw ProtocolError("adapter reported error for id " +
                          response.value("id", json()).dump() + ": " +
                          response["error"].dump());
    }
    auto id_it = response.find("id");
    if (id_it == response.end() || !id_it->is_number_integer()) {
      throw ProtocolError("adapter response without integer id: " + line);
    }
    long long id = id_it->get<long long>();
    auto it = pending.find(id);
    if (it == pending.end()) {
      throw ProtocolError("adapter answered unknown or duplicate id " +
                          std::to_string(id));
    }
    auto label_it = response.find("label");
    std::optional<EthosLabel> label;
    if (label_it != response.end() && label_it->is_string()) {
      label = parse_label(label_it->get_ref<const std::string&>());
    }
    if (!label) {
      throw ProtocolError(
          "adapter returned invalid label " +
          (label_it == response.end() ? std::string("<missing>")
                                      : label_it->dump()) +
          " for id " + std::to_string(id));
    }
    std::optional<double> confidence;
    if (auto c = response.find("confidence");
        c != response.end() && !c->is_null()) {
      if (!c->is_number() || c->get<double>() < 0.0 || c->get<double>() > 1.0) {
        throw ProtocolError("adapter returned confidence " + c->dump() +
                            " outside [0,1] for id " + std::to_string(id));
      }
      confidence = c->get<double>();
    }
    results[it->second] =
        LabeledMention{batch[it->second], *label, confidence, classifier};
    pending.erase(it);
  }

  std::vector<LabeledMention> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  broken_ = false;
  return out;
}

std::vector<LabeledMention> classify_external(
    std::span<const MentionSentence> batch, AdapterClient& adapter) {
  return adapter.classify_batch(batch);
}

std::vector<LabeledMention> ExternalClassifier::classify(
    std::span<const MentionSentence> mentions) {
  std::vector<LabeledMention> out;
  out.reserve(mentions.size());
  const std::size_t step = client_->options().batch_size;
  for (std::size_t start = 0; start < mentions.size(); start += step) {
    auto part = mentions.subspan(start, std::min(step, mentions.size() - start));
    auto labels = client_->classify_batch(part);
    out.insert(out.end(), std::make_move_iterator(labels.begin()),
               std::make_move_iterator(labels.end()));
  }
  return out;
}

}  // namespace trustan
