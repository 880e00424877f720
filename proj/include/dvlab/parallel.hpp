#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace dvlab {

// Worker count used by every parallel estimator. 0 means "all hardware
// threads". Results never depend on this value: work is split into
// replicas whose boundaries and RNG streams are fixed up front.
void set_worker_count(unsigned workers);
unsigned worker_count();

namespace detail {
void run_parallel(std::size_t count, const std::function<void(std::size_t)> &task);
}

/// Runs task(i) for i in [0, count). Tasks may run in any order on any
/// worker; each must only write to state owned by index i.
template <class Task> void parallel_for(std::size_t count, Task &&task) {
  detail::run_parallel(count, std::function<void(std::size_t)>(std::forward<Task>(task)));
}

/// Maps i -> fn(i) in parallel and returns results in index order.
template <class Fn> auto parallel_map(std::size_t count, Fn &&fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

} // namespace dvlab
