#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

namespace voterperc {

// The parallel-map capability handed to the estimators. Work is split into
// fixed-size blocks independent of the worker count, and reductions combine
// block partials in block order, so results never depend on `workers`.
class ParallelMap {
 public:
  static constexpr std::size_t kBlock = 64;

  explicit ParallelMap(unsigned workers = 1);

  unsigned workers() const { return workers_; }

  // Runs fn(i) for every i in [0, n). Calls for distinct i may run
  // concurrently. The first exception thrown is rethrown after all workers
  // have stopped.
  void for_each(std::size_t n, const std::function<void(std::size_t)>& fn) const;

  template <class T, class Map, class Combine>
  T map_reduce(std::size_t n, T init, Map&& map, Combine&& combine) const {
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    std::vector<T> partial(blocks, init);
    for_each(blocks, [&](std::size_t b) {
      T acc = init;
      const std::size_t end = std::min(n, (b + 1) * kBlock);
      for (std::size_t i = b * kBlock; i < end; ++i) combine(acc, map(i));
      partial[b] = std::move(acc);
    });
    T total = init;
    for (auto& p : partial) combine(total, p);
    return total;
  }

 private:
  unsigned workers_;
};

// Single-worker instance used when callers do not supply one.
const ParallelMap& serial_map();

}  // namespace voterperc
