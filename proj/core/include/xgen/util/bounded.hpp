#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <future>
#include <semaphore>
#include <vector>

namespace xgen::util {

/// Runs fn(0) .. fn(count - 1) on worker threads with at most `max_in_flight`
/// running at once. Waits for all of them; the first exception (by index)
/// is rethrown.
template <typename Fn>
void for_each_bounded(std::size_t count, std::size_t max_in_flight, Fn fn) {
  std::counting_semaphore<> slots(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, max_in_flight)));
  std::vector<std::future<void>> running;
  running.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    slots.acquire();
    running.push_back(std::async(std::launch::async, [&slots, &fn, i] {
      struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
      } release{slots};
      fn(i);
    }));
  }
  std::exception_ptr first;
  for (auto& f : running) {
    try {
      f.get();
    } catch (...) {
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace xgen::util
