#ifndef ADSRNOTE_PARALLEL_HPP
#define ADSRNOTE_PARALLEL_HPP

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace adsrnote {

// Static range partition over worker threads. Workers write to disjoint
// output slots, so results do not depend on the thread count.
inline void parallel_for(int n, int threads,
                         const std::function<void(int begin, int end)>& body) {
  if (n <= 0) return;
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace adsrnote

#endif  // ADSRNOTE_PARALLEL_HPP
