#include "dsim/core/parallel.hpp"

#include <algorithm>
#include <memory>

namespace dsim {

ThreadPool::ThreadPool(unsigned workers) {
    if (workers == 0) workers = 1;
    for (unsigned i = 0; i + 1 < workers; ++i)
        threads_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard lk(m_);
        stop_ = true;
    }
    cv_work_.notify_all();
    for (auto& t : threads_) t.join();
}

void ThreadPool::worker_loop() {
    uint64_t seen = 0;
    for (;;) {
        const std::function<void(size_t)>* job = nullptr;
        size_t nch = 0;
        {
            std::unique_lock lk(m_);
            cv_work_.wait(lk, [&] { return stop_ || (generation_ != seen && job_ != nullptr); });
            if (stop_) return;
            seen = generation_;
            job = job_;
            nch = n_chunks_;
            done_.fetch_add(1, std::memory_order_relaxed);  // reused as active count
        }
        for (;;) {
            const size_t c = next_.fetch_add(1, std::memory_order_relaxed);
            if (c >= nch) break;
            (*job)(c);
        }
        {
            std::lock_guard lk(m_);
            done_.fetch_sub(1, std::memory_order_relaxed);
        }
        cv_done_.notify_one();
    }
}

void ThreadPool::run_chunks(size_t n_chunks, const std::function<void(size_t)>& fn) {
    if (n_chunks == 0) return;
    if (threads_.empty() || n_chunks == 1) {
        for (size_t c = 0; c < n_chunks; ++c) fn(c);
        return;
    }
    {
        std::lock_guard lk(m_);
        job_ = &fn;
        n_chunks_ = n_chunks;
        next_.store(0, std::memory_order_relaxed);
        done_.store(0, std::memory_order_relaxed);  // active worker count
        ++generation_;
    }
    cv_work_.notify_all();
    // The calling thread participates; fn stays alive until every worker has
    // left the chunk loop.
    for (;;) {
        const size_t c = next_.fetch_add(1, std::memory_order_relaxed);
        if (c >= n_chunks) break;
        fn(c);
    }
    std::unique_lock lk(m_);
    cv_done_.wait(lk, [&] { return done_.load(std::memory_order_relaxed) == 0; });
    job_ = nullptr;
}

namespace {
unsigned g_thread_count = 0;
std::unique_ptr<ThreadPool> g_pool;
}  // namespace

void set_thread_count(unsigned n) {
    g_thread_count = n;
    g_pool.reset();
}

unsigned thread_count() {
    if (g_thread_count == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        g_thread_count = hw == 0 ? 1 : hw;
    }
    return g_thread_count;
}

ThreadPool& pool() {
    if (!g_pool) g_pool = std::make_unique<ThreadPool>(thread_count());
    return *g_pool;
}

void parallel_for(size_t begin, size_t end, size_t grain,
                  const std::function<void(size_t, size_t)>& body) {
    if (end <= begin) return;
    if (grain == 0) grain = 1;
    const size_t n = end - begin;
    const size_t n_chunks = (n + grain - 1) / grain;
    pool().run_chunks(n_chunks, [&](size_t c) {
        const size_t lo = begin + c * grain;
        const size_t hi = std::min(end, lo + grain);
        body(lo, hi);
    });
}

double pairwise_sum(std::span<const double> v) {
    const size_t n = v.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = v[0];
        for (size_t i = 1; i < n; ++i) s += v[i];
        return s;
    }
    size_t half = 1;
    while (half * 2 < n) half *= 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

double det_sum(std::span<const double> v) {
    constexpr size_t kChunk = 4096;
    const size_t n = v.size();
    if (n <= kChunk) return pairwise_sum(v);
    const size_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> partial(n_chunks);
    parallel_for(0, n_chunks, 1, [&](size_t lo, size_t hi) {
        for (size_t c = lo; c < hi; ++c) {
            const size_t a = c * kChunk;
            partial[c] = pairwise_sum(v.subspan(a, std::min(kChunk, n - a)));
        }
    });
    return pairwise_sum(partial);
}

double det_sum_strided(const double* base, size_t count, size_t stride) {
    std::vector<double> tmp(count);
    for (size_t i = 0; i < count; ++i) tmp[i] = base[i * stride];
    return pairwise_sum(tmp);
}

}  // namespace dsim
