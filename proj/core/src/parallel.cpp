#include "voterperc/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace voterperc {

ParallelMap::ParallelMap(unsigned workers) : workers_(std::max(1u, workers)) {}

void ParallelMap::for_each(std::size_t n,
                           const std::function<void(std::size_t)>& fn) const {
  if (n == 0) return;
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(workers_, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

const ParallelMap& serial_map() {
  static const ParallelMap instance(1);
  return instance;
}

}  // namespace voterperc
