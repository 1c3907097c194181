#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace g3arb::detail {

// Minimal fork-join pool. Workers are spawned once and spin briefly before
// parking on a condition variable, so bursts of small batches (per-price-
// update searches, benchmark reps) see microsecond dispatch instead of a
// futex wake. The caller always executes the first chunk itself.
class ThreadPool {
public:
    static ThreadPool& global() {
        static ThreadPool pool(default_threads());
        return pool;
    }

    static unsigned default_threads() {
        const unsigned hc = std::thread::hardware_concurrency();
        return hc == 0 ? 1 : hc;
    }

    explicit ThreadPool(unsigned workers) {
        workers_.reserve(workers);
        for (unsigned t = 0; t < workers; ++t)
            workers_.emplace_back([this] { worker_loop(); });
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    ~ThreadPool() {
        stop_.store(true, std::memory_order_relaxed);
        {
            std::lock_guard lk(mu_);
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    // Splits [0, n) into contiguous chunks and runs fn(begin, end) on up to
    // `threads` lanes (0 = available parallelism). Blocks until all chunks
    // finish. Safe to call from multiple external threads; must not be
    // called from inside a pool task.
    template <typename Fn>
    void parallel_ranges(unsigned threads, std::size_t n, Fn&& fn) {
        if (threads == 0) threads = default_threads();
        threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
        if (threads <= 1 || workers_.empty()) {
            if (n > 0) fn(std::size_t{0}, n);
            return;
        }
        const std::size_t chunk = (n + threads - 1) / threads;
        std::atomic<std::size_t> remaining{threads - 1};
        {
            std::lock_guard lk(mu_);
            for (unsigned t = 1; t < threads; ++t) {
                const std::size_t b = std::min(n, t * chunk);
                const std::size_t e = std::min(n, b + chunk);
                queue_.emplace_back([&fn, &remaining, b, e] {
                    if (b < e) fn(b, e);
                    remaining.fetch_sub(1, std::memory_order_release);
                });
            }
            pending_.fetch_add(threads - 1, std::memory_order_release);
        }
        cv_.notify_all();
        fn(std::size_t{0}, std::min(n, chunk));
        // chunks are equal-sized; the tail wait is on the order of one chunk
        while (remaining.load(std::memory_order_acquire) != 0) cpu_relax();
    }

private:
    static void cpu_relax() {
#if defined(__x86_64__) || defined(__i386__)
        __builtin_ia32_pause();
#else
        std::this_thread::yield();
#endif
    }

    void worker_loop() {
        for (;;) {
            for (int spin = 0; spin < 20000; ++spin) {
                if (pending_.load(std::memory_order_acquire) > 0 ||
                    stop_.load(std::memory_order_relaxed))
                    break;
                cpu_relax();
            }
            std::function<void()> task;
            {
                std::unique_lock lk(mu_);
                if (queue_.empty() && pending_.load(std::memory_order_relaxed) == 0 &&
                    !stop_.load(std::memory_order_relaxed))
                    cv_.wait_for(lk, std::chrono::milliseconds(50), [this] {
                        return stop_.load(std::memory_order_relaxed) || !queue_.empty();
                    });
                if (stop_.load(std::memory_order_relaxed) && queue_.empty()) return;
                if (queue_.empty()) continue;
                task = std::move(queue_.front());
                queue_.pop_front();
                pending_.fetch_sub(1, std::memory_order_relaxed);
            }
            task();
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::function<void()>> queue_;
    std::atomic<std::size_t> pending_{0};
    std::atomic<bool> stop_{false};
};

}  // namespace g3arb::detail
