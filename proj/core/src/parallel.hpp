#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace advmg::detail {

// Runs fn(i) for i in [0, count) in contiguous chunks. Callers guarantee the
// iterations write disjoint memory, so the result does not depend on threads.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

// Fixed-order pairwise sum; the association order only depends on values.size().
inline double pairwise_sum(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::size_t n = values.size();
  while (n > 1) {
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) values[i] = values[2 * i] + values[2 * i + 1];
    if (n % 2 == 1) values[half] = values[n - 1];
    n = half + n % 2;
  }
  return values[0];
}

}  // namespace advmg::detail
