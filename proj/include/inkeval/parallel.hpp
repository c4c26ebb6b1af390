#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace inkeval {

/// Bounds the number of concurrent in-flight requests.
class InflightLimiter {
 public:
  explicit InflightLimiter(int cap) : available_(std::max(cap, 1)) {}

  class Permit {
   public:
    explicit Permit(InflightLimiter& owner) : owner_(owner) { owner_.acquire(); }
    ~Permit() { owner_.release(); }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;

   private:
    InflightLimiter& owner_;
  };

 private:
  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      ++available_;
    }
    cv_.notify_one();
  }

  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index is
/// processed exactly once; callers write results into slot i so the outcome
/// does not depend on completion order. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace inkeval
