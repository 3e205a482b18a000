#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>

namespace expembed {

enum class Execution { Serial, Parallel };

// Runs body(i) for i in [0, n). The serial branch is the reference the
// parallel branch is tested against; both must produce identical per-index
// results because every path owns its engine.
template <class Body>
void for_each_path(std::size_t n, Execution exec, Body&& body) {
  if (exec == Execution::Serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace expembed
