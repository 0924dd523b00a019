#include "apneakit/nn/parallel.hpp"

#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace apneakit::nn {

namespace {

thread_local bool g_inside_worker = false;

// All scheduling state lives under one mutex; tasks are coarse (a few per
// parallel_for), so the locking cost is noise. Workers can never claim tasks
// across generations because claims re-check the generation under the lock.
class ThreadPool {
 public:
  explicit ThreadPool(int workers) {
    for (int i = 0; i < workers; ++i)
      threads_.emplace_back([this] { worker_loop(); });
  }

  ~ThreadPool() {
    {
      std::unique_lock lock(mutex_);
      stop_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void run(int tasks, const std::function<void(int)>& fn) {
    std::unique_lock lock(mutex_);
    fn_ = &fn;
    next_ = 0;
    total_ = tasks;
    pending_ = tasks;
    ++generation_;
    const uint64_t my_generation = generation_;
    wake_.notify_all();

    while (next_ < total_ && generation_ == my_generation) {
      const int task = next_++;
      lock.unlock();
      fn(task);
      lock.lock();
      if (--pending_ == 0) done_.notify_all();
    }
    done_.wait(lock, [&] { return pending_ == 0; });
    fn_ = nullptr;
  }

 private:
  void worker_loop() {
    g_inside_worker = true;
    std::unique_lock lock(mutex_);
    uint64_t seen = 0;
    while (true) {
      wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      const uint64_t my_generation = generation_;
      while (next_ < total_ && generation_ == my_generation) {
        const int task = next_++;
        const auto* fn = fn_;
        lock.unlock();
        (*fn)(task);
        lock.lock();
        if (--pending_ == 0) done_.notify_all();
      }
      seen = my_generation;
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(int)>* fn_ = nullptr;
  int next_ = 0;
  int total_ = 0;
  int pending_ = 0;
  uint64_t generation_ = 0;
  bool stop_ = false;
};

int g_requested_threads = 0;

int default_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : int(hc);
}

ThreadPool* pool_for(int threads) {
  static int pool_size = 0;
  static ThreadPool* pool = nullptr;
  if (threads != pool_size) {
    delete pool;
    pool = threads > 1 ? new ThreadPool(threads - 1) : nullptr;
    pool_size = threads;
  }
  return pool;
}

std::mutex g_pool_mutex;

}  // namespace

void set_num_threads(int n) {
  std::unique_lock lock(g_pool_mutex);
  g_requested_threads = n;
}

int num_threads() {
  return g_requested_threads > 0 ? g_requested_threads : default_threads();
}

void parallel_for(int64_t begin, int64_t end,
                  const std::function<void(int64_t, int64_t)>& fn) {
  const int64_t n = end - begin;
  if (n <= 0) return;

  const int threads = num_threads();
  if (threads <= 1 || n == 1 || g_inside_worker) {
    fn(begin, end);
    return;
  }

  const int chunks = int(std::min<int64_t>(threads, n));
  std::unique_lock lock(g_pool_mutex);
  ThreadPool* pool = pool_for(threads);
  if (!pool) {
    fn(begin, end);
    return;
  }
  pool->run(chunks, [&](int chunk) {
    const int64_t lo = begin + n * chunk / chunks;
    const int64_t hi = begin + n * (chunk + 1) / chunks;
    if (lo < hi) fn(lo, hi);
  });
}

}  // namespace apneakit::nn
