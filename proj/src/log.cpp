#include "magspec/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace magspec {

namespace {
std::atomic<bool> muted{false};
std::mutex stderr_mutex;
}  // namespace

void warn(std::string_view message) {
  if (muted.load()) return;
  std::lock_guard lock(stderr_mutex);
  std::cerr << "warning: " << message << '\n';
}

void set_warnings_muted(bool m) { muted.store(m); }

}  // namespace magspec
