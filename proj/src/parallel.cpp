#include "msar/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace msar {

namespace {
std::atomic<std::size_t> g_threads{1};
}

void set_thread_count(std::size_t n) {
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  g_threads.store(n);
}

std::size_t thread_count() { return g_threads.load(); }

void parallel_chunks(std::size_t n, std::size_t n_chunks,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  n_chunks = std::clamp<std::size_t>(n_chunks, 1, n);
  auto bounds = [&](std::size_t c) {
    return std::pair{n * c / n_chunks, n * (c + 1) / n_chunks};
  };
  const std::size_t workers = std::min(thread_count(), n_chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const auto [b, e] = bounds(c);
      fn(c, b, e);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t c = next++; c < n_chunks; c = next++) {
      try {
        const auto [b, e] = bounds(c);
        fn(c, b, e);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace msar
