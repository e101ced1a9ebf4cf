#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>

#include "trustan/corpus.h"
#include "trustan/errors.h"
#include "trustan/logging.h"

namespace trustan {
namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string target;  // path plus query
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?)://([^/?#]+)([^#]*)(#.*)?$)",
                               std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw FetchError("not an http(s) URL: " + url, 0, false);
  }
  std::string target = m[3].str();
  std::string path = target.substr(0, target.find('?'));
  std::string query =
      path.size() < target.size() ? target.substr(path.size()) : "";
  if (path.empty()) path = "/";
  if (!path.ends_with(".json")) {
    while (path.size() > 1 && path.back() == '/') path.pop_back();
    path += ".json";
  }
  return {m[1].str() + "://" + m[2].str(), path + query};
}

std::optional<std::chrono::seconds> parse_retry_after(
    const httplib::Response& res) {
  if (!res.has_header("Retry-After")) return std::nullopt;
  const std::string value = res.get_header_value("Retry-After");
  char* end = nullptr;
  long seconds = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || seconds < 0) return std::nullopt;
  return std::chrono::seconds{seconds};
}

std::string resolve_user_agent(const FetchOptions& options) {
  if (!options.user_agent.empty()) return options.user_agent;
  if (const char* env = std::getenv(kUserAgentEnv); env && *env) return env;
  return "trustan/1.0";
}

}  // namespace

std::vector<Post> fetch_thread(const std::string& url,
                               const FetchOptions& options) {
  ParsedUrl parsed = parse_url(url);
  httplib::Client client(parsed.origin);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_follow_location(true);
  httplib::Headers headers{{"User-Agent", resolve_user_agent(options)},
                           {"Accept", "application/json"}};

  auto sleep = options.sleep ? options.sleep : [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };

  for (int attempt = 0;; ++attempt) {
    std::optional<FetchError> failure;
    auto res = client.Get(parsed.target, headers);
    if (!res) {
      failure.emplace("request to " + url + " failed: " +
                          httplib::to_string(res.error()),
                      0, true);
    } else if (res->status >= 200 && res->status < 300) {
      return parse_thread_document(res->body, url);
    } else if (res->status == 429 || res->status >= 500) {
      failure.emplace("GET " + url + " returned HTTP " +
                          std::to_string(res->status),
                      res->status, true, parse_retry_after(*res));
    } else {
      throw FetchError("GET " + url + " returned HTTP " +
                           std::to_string(res->status),
                       res->status, false);
    }

    if (attempt >= options.retries) throw *failure;
    std::chrono::milliseconds delay =
        failure->retry_after()
            ? std::chrono::duration_cast<std::chrono::milliseconds>(
                  *failure->retry_after())
            : std::chrono::milliseconds{500} * (1 << std::min(attempt, 6));
    warn(std::string(failure->what()) + "; retrying in " +
         std::to_string(delay.count()) + " ms");
    sleep(delay);
  }
}

}  // namespace trustan
