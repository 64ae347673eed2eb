#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace semann {

/// Run fn(0..n-1) across `workers` threads (serial when workers <= 1).
/// Tasks must write only to their own output slots; results are then
/// independent of scheduling, which keeps parallel runs bit-identical to
/// serial ones.
inline void parallel_for_index(int n, int workers,
                               const std::function<void(int)>& fn) {
  if (workers <= 0)
    workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const int spawn = std::min(workers, n);
  pool.reserve(static_cast<std::size_t>(spawn));
  for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace semann
