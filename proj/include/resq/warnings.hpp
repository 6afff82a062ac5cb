#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <utility>

namespace resq {

// Non-fatal diagnostics (dispersive validity, clamped pulse strengths) go
// through one replaceable sink. The default writes to stderr.
using WarningSink = std::function<void(const std::string&)>;

namespace detail {

struct WarningState {
  std::mutex mutex;
  WarningSink sink;
};

inline WarningState& warning_state() {
  static WarningState state;
  return state;
}

}  // namespace detail

// Installs a sink and returns the previous one. An empty sink restores stderr.
inline WarningSink set_warning_sink(WarningSink sink) {
  auto& st = detail::warning_state();
  std::lock_guard lock(st.mutex);
  return std::exchange(st.sink, std::move(sink));
}

inline void warn(const std::string& message) {
  auto& st = detail::warning_state();
  std::lock_guard lock(st.mutex);
  if (st.sink) {
    st.sink(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

}  // namespace resq
