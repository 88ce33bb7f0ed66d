#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

// Work sharing with a determinism contract: chunk boundaries depend only on
// the problem size, never on the worker count, and chunks write disjoint
// ranges. Reductions collect fixed-size chunk partials and combine them with
// a pairwise tree of fixed layout, so results are bit-stable across thread
// counts (identical to 0 ULP).

namespace dsim {

class ThreadPool {
  public:
    explicit ThreadPool(unsigned workers);
    ~ThreadPool();

    unsigned workers() const { return static_cast<unsigned>(threads_.size()) + 1; }

    // Executes fn(chunk_index) for chunk_index in [0, n_chunks); any thread
    // may pick any chunk.
    void run_chunks(size_t n_chunks, const std::function<void(size_t)>& fn);

  private:
    void worker_loop();

    std::vector<std::thread> threads_;
    std::mutex m_;
    std::condition_variable cv_work_, cv_done_;
    const std::function<void(size_t)>* job_ = nullptr;
    size_t n_chunks_ = 0;
    std::atomic<size_t> next_{0};
    std::atomic<size_t> done_{0};
    uint64_t generation_ = 0;
    bool stop_ = false;
};

// Global pool. set_thread_count must be called before first use to take
// effect (the CLI --threads flag does this at startup).
ThreadPool& pool();
void set_thread_count(unsigned n);
unsigned thread_count();

// Parallel loop over [begin, end) in fixed chunks of `grain` iterations.
void parallel_for(size_t begin, size_t end, size_t grain,
                  const std::function<void(size_t, size_t)>& body);
inline void parallel_for_each(size_t begin, size_t end,
                              const std::function<void(size_t)>& body, size_t grain = 1) {
    parallel_for(begin, end, grain, [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i) body(i);
    });
}

// Fixed-layout pairwise summation (serial).
double pairwise_sum(std::span<const double> v);

// Parallel deterministic sum: fixed 4096-element chunks summed pairwise,
// partials combined pairwise in chunk order.
double det_sum(std::span<const double> v);

// det_sum over a strided view: v[offset + i*stride], i in [0, count).
double det_sum_strided(const double* base, size_t count, size_t stride);

}  // namespace dsim
