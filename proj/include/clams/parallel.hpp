#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace clams {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items must
// be independent; results land in caller-owned slots indexed by i, so output
// is deterministic regardless of scheduling.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  const auto n_workers = static_cast<std::size_t>(threads);
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace clams
