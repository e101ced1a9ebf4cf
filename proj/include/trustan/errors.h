#ifndef TRUSTAN_ERRORS_H_
#define TRUSTAN_ERRORS_H_

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

namespace trustan {

// Base for every error raised by the library. Retriable errors describe
// transient conditions (network, timeouts) where the caller may try again.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, bool retriable = false)
      : std::runtime_error(what), retriable_(retriable) {}

  bool retriable() const { return retriable_; }

 private:
  bool retriable_;
};

// Malformed input record. line is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& reason)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) +
              ": " + reason),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& reason)
      : Error(path + ": " + reason), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// HTTP failure. status is 0 when no response was received.
class FetchError : public Error {
 public:
  FetchError(const std::string& what, int status, bool retriable,
             std::optional<std::chrono::seconds> retry_after = std::nullopt)
      : Error(what, retriable), status_(status), retry_after_(retry_after) {}

  int status() const { return status_; }
  std::optional<std::chrono::seconds> retry_after() const {
    return retry_after_;
  }

 private:
  int status_;
  std::optional<std::chrono::seconds> retry_after_;
};

// Violation of the adapter wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class AdapterTimeout : public Error {
 public:
  explicit AdapterTimeout(const std::string& what) : Error(what, true) {}
};

// Adapter process died or the endpoint failed; diagnostics holds captured
// stderr or the response body.
class AdapterFailure : public Error {
 public:
  AdapterFailure(const std::string& what, std::string diagnostics)
      : Error(diagnostics.empty() ? what : what + "\n" + diagnostics),
        diagnostics_(std::move(diagnostics)) {}

  const std::string& diagnostics() const { return diagnostics_; }

 private:
  std::string diagnostics_;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace trustan

#endif  // TRUSTAN_ERRORS_H_
