#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mfga {

/// Fixed-size pool that runs index ranges in parallel. Work is split into
/// contiguous chunks, so any reduction done afterwards over per-index slots
/// in index order is independent of the thread count.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t threads = 0)
      : threads_(threads == 0 ? default_threads() : threads) {}

  std::size_t threads() const { return threads_; }

  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) const {
    if (n == 0) return;
    const std::size_t workers = std::min(threads_, n);
    if (workers <= 1) {
      for (std::size_t i = 0; i < n; ++i) body(i);
      return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      pool.emplace_back([&, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
    pool.clear();
    if (first_error) std::rethrow_exception(first_error);
  }

  static std::size_t default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
  }

 private:
  std::size_t threads_;
};

/// Pairwise (cascade) summation in a fixed order.
template <class T, class Get>
T pairwise_sum(std::size_t begin, std::size_t end, const Get& get, T zero) {
  const std::size_t n = end - begin;
  if (n == 0) return zero;
  if (n <= 8) {
    T acc = zero;
    for (std::size_t i = begin; i < end; ++i) acc += get(i);
    return acc;
  }
  const std::size_t mid = begin + n / 2;
  T left = pairwise_sum(begin, mid, get, zero);
  left += pairwise_sum(mid, end, get, zero);
  return left;
}

}  // namespace mfga
