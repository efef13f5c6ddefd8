// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace swaplab {

/// Fixed-size pool for the worker simulation. parallel_for(n, fn) runs fn(i)
/// for i in [0,n) and blocks until all complete; with size()==1 everything
/// runs inline on the caller, which is the forced single-threaded mode used
/// for oracle comparisons. Results must be written to per-index slots; the
/// pool guarantees completion order is irrelevant to outputs. Calls must not
/// nest.
class ThreadPool {
 public:
  /// threads <= 0 selects hardware_concurrency().
  explicit ThreadPool(int threads = 0);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int size() const { return size_; }

  /// Exceptions from tasks are captured; the one with the lowest index is
  /// rethrown after all tasks finish.
  void parallel_for(int n, const std::function<void(int)>& fn);

 private:
  void worker_loop();

  int size_ = 1;
  std::vector<std::thread> threads_;

  std::mutex mu_;
  std::condition_variable cv_work_;
  std::condition_variable cv_done_;
  const std::function<void(int)>* job_ = nullptr;
  int job_total_ = 0;
  int job_next_ = 0;
  int job_pending_ = 0;
  bool stop_ = false;
  std::vector<std::exception_ptr>* job_errors_ = nullptr;
};

}  // namespace swaplab
