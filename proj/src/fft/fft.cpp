#include "dsim/fft/fft.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "dsim/core/parallel.hpp"
#include "dsim/simd/kernels.hpp"

namespace dsim {

FftPlan::FftPlan(int size) : n(size) {
    if (n < 2 || (n & (n - 1)) != 0)
        throw std::invalid_argument("FftPlan: n must be a power of two >= 2");
    while ((1 << log2n) < n) ++log2n;

    bitrev.resize(n);
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < log2n; ++b) r |= ((i >> b) & 1) << (log2n - 1 - b);
        bitrev[i] = r;
    }

    tw_fwd.resize(log2n);
    tw_inv.resize(log2n);
    for (int s = 0; s < log2n; ++s) {
        const int half = 1 << s;
        tw_fwd[s].resize(half);
        tw_inv[s].resize(half);
        for (int j = 0; j < half; ++j) {
            const double ang = -std::numbers::pi * j / half;
            tw_fwd[s][j] = cd(std::cos(ang), std::sin(ang));
            tw_inv[s][j] = std::conj(tw_fwd[s][j]);
        }
    }
}

const FftPlan& FftPlan::get(int n) {
    static std::map<int, FftPlan> cache;
    static std::mutex m;
    std::lock_guard lk(m);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, FftPlan(n)).first;
    return it->second;
}

void fft_row(cd* row, const FftPlan& plan, FftDir dir) {
    const auto& ops = simd::ops();
    const int n = plan.n;
    for (int i = 0; i < n; ++i) {
        const int r = plan.bitrev[i];
        if (i < r) std::swap(row[i], row[r]);
    }
    const auto& tw = dir == FftDir::forward ? plan.tw_fwd : plan.tw_inv;
    for (int s = 0; s < plan.log2n; ++s) {
        const int half = 1 << s;
        for (int blk = 0; blk < n; blk += 2 * half)
            ops.bf_table(row + blk, row + blk + half, tw[s].data(), half);
    }
}

void fft_rows(cd* data, int nrow, const FftPlan& plan, FftDir dir) {
    parallel_for(0, static_cast<size_t>(nrow), 8, [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i) fft_row(data + i * plan.n, plan, dir);
    });
}

void fft_cols(cd* data, int ncol, const FftPlan& plan, FftDir dir) {
    const int n = plan.n;
    const auto& tw = dir == FftDir::forward ? plan.tw_fwd : plan.tw_inv;
    // Column strips sized so one strip of all n rows stays cache-resident.
    const int strip = std::clamp(512 * 1024 / (n * 16), 16, 256);
    const size_t nstrips = (ncol + strip - 1) / strip;
    parallel_for(0, nstrips, 1, [&](size_t slo, size_t shi) {
        const auto& ops = simd::ops();
        std::vector<cd> tmp(strip);
        for (size_t sblk = slo; sblk < shi; ++sblk) {
            const int c0 = static_cast<int>(sblk) * strip;
            const int w = std::min(strip, ncol - c0);
            for (int i = 0; i < n; ++i) {
                const int r = plan.bitrev[i];
                if (i < r) {
                    cd* a = data + static_cast<size_t>(i) * ncol + c0;
                    cd* b = data + static_cast<size_t>(r) * ncol + c0;
                    std::copy(a, a + w, tmp.data());
                    std::copy(b, b + w, a);
                    std::copy(tmp.data(), tmp.data() + w, b);
                }
            }
            for (int s = 0; s < plan.log2n; ++s) {
                const int half = 1 << s;
                for (int blk = 0; blk < n; blk += 2 * half)
                    for (int j = 0; j < half; ++j) {
                        cd* a = data + static_cast<size_t>(blk + j) * ncol + c0;
                        cd* b = data + static_cast<size_t>(blk + j + half) * ncol + c0;
                        ops.bf_const(a, b, tw[s][j], w);
                    }
            }
        }
    });
}

}  // namespace dsim
