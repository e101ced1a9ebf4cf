#ifndef TRUSTAN_LOGGING_H_
#define TRUSTAN_LOGGING_H_

#include <functional>
#include <string>

namespace trustan {

using WarningSink = std::function<void(const std::string&)>;

// Emits a warning through the installed sink (stderr by default).
void warn(const std::string& message);

// Replaces the warning sink, returning the previous one. Passing an empty
// function restores the stderr sink.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace trustan

#endif  // TRUSTAN_LOGGING_H_
