#ifndef TRUSTAN_TESTS_TEST_UTIL_H_
#define TRUSTAN_TESTS_TEST_UTIL_H_

#include <stdlib.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "trustan/logging.h"

namespace trustan::testing {

inline std::filesystem::path data_dir() { return TRUSTAN_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return TRUSTAN_FIXTURE_DIR; }

class TempDir {
 public:
  TempDir() {
    std::string pattern =
        (std::filesystem::temp_directory_path() / "trustan-test-XXXXXX").string();
    path_ = ::mkdtemp(pattern.data());
  }
  ~TempDir() {
    std::error_code ignored;
    std::filesystem::remove_all(path_, ignored);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Collects warnings for the lifetime of the object.
class WarningCapture {
 public:
  WarningCapture() {
    previous_ = set_warning_sink(
        [this](const std::string& message) { warnings_.push_back(message); });
  }
  ~WarningCapture() { set_warning_sink(std::move(previous_)); }

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  WarningSink previous_;
  std::vector<std::string> warnings_;
};

}  // namespace trustan::testing

#endif  // TRUSTAN_TESTS_TEST_UTIL_H_
