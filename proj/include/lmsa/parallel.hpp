#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lmsa {

/// Replicas per work unit. Fixed so that the reduction tree, and therefore
/// every floating-point sum, does not depend on the worker count.
inline constexpr std::size_t kReplicaBlock = 64;

inline std::size_t block_count(std::size_t replicas) {
  return (replicas + kReplicaBlock - 1) / kReplicaBlock;
}

inline std::size_t resolve_workers(std::size_t requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Calls body(b) for every b in [0, n). If bodies throw, the exception from
/// the lowest block index is rethrown.
inline void parallel_for_blocks(std::size_t n, std::size_t workers,
                                const std::function<void(std::size_t)>& body) {
  workers = std::min(resolve_workers(workers), std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::mutex guard;
  std::size_t failed_block = n;
  std::exception_ptr failure;

  auto run = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n) return;
      try {
        body(b);
      } catch (...) {
        std::lock_guard lock(guard);
        if (b < failed_block) {
          failed_block = b;
          failure = std::current_exception();
        }
      }
    }
  };

  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

/// Pairwise-tree fold of items[lo, hi) into items[lo] with merge(a, b): a += b.
template <typename T, typename Merge>
void tree_reduce(std::vector<T>& items, Merge merge, std::size_t lo = 0, std::size_t hi = SIZE_MAX) {
  if (hi == SIZE_MAX) hi = items.size();
  if (hi - lo <= 1) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  tree_reduce(items, merge, lo, mid);
  tree_reduce(items, merge, mid, hi);
  merge(items[lo], items[mid]);
}

}  // namespace lmsa
