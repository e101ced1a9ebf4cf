#include "trustan/logging.h"

#include <iostream>
#include <mutex>

namespace trustan {
namespace {

std::mutex& sink_mutex() {
  static std::mutex mu;
  return mu;
}

WarningSink& sink() {
  static WarningSink s;
  return s;
}

}  // namespace

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (sink()) {
    sink()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

WarningSink set_warning_sink(WarningSink s) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  WarningSink previous = std::move(sink());
  sink() = std::move(s);
  return previous;
}

}  // namespace trustan
