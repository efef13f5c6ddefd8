// SPDX-License-Identifier: Apache-2.0
#include "swaplab/thread_pool.hpp"

#include <algorithm>

namespace swaplab {

ThreadPool::ThreadPool(int threads) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  size_ = std::max(threads, 1);
  if (size_ == 1) return;  // inline mode, no worker threads
  threads_.reserve(static_cast<size_t>(size_));
  for (int i = 0; i < size_; ++i) threads_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  cv_work_.notify_all();
  for (auto& t : threads_) t.join();
}

void ThreadPool::worker_loop() {
  for (;;) {
    int index = -1;
    const std::function<void(int)>* job = nullptr;
    std::vector<std::exception_ptr>* errors = nullptr;
    {
      std::unique_lock<std::mutex> lock(mu_);
      cv_work_.wait(lock, [&] { return stop_ || (job_ && job_next_ < job_total_); });
      if (stop_) return;
      index = job_next_++;
      job = job_;
      errors = job_errors_;
    }
    try {
      (*job)(index);
    } catch (...) {
      (*errors)[static_cast<size_t>(index)] = std::current_exception();
    }
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (--job_pending_ == 0) cv_done_.notify_all();
    }
  }
}

void ThreadPool::parallel_for(int n, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n));

  if (size_ == 1) {
    for (int i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
        break;  // sequential mode stops at the first failure
      }
    }
  } else {
    {
      std::lock_guard<std::mutex> lock(mu_);
      job_ = &fn;
      job_total_ = n;
      job_next_ = 0;
      job_pending_ = n;
      job_errors_ = &errors;
    }
    cv_work_.notify_all();
    {
      std::unique_lock<std::mutex> lock(mu_);
      cv_done_.wait(lock, [&] { return job_pending_ == 0; });
      job_ = nullptr;
      job_errors_ = nullptr;
    }
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace swaplab
