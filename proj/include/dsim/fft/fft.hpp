#pragma once

#include <complex>
#include <vector>

namespace dsim {

using cd = std::complex<double>;

enum class FftDir { forward, inverse };

// Radix-2 plan for power-of-two n. Convention: forward uses exp(-i k x),
// inverse exp(+i k x); both passes are unnormalized, callers fold the 1/n.
struct FftPlan {
    int n = 0;
    int log2n = 0;
    std::vector<int> bitrev;
    std::vector<std::vector<cd>> tw_fwd;  // per stage, half-size twiddle table
    std::vector<std::vector<cd>> tw_inv;

    explicit FftPlan(int n);
    static const FftPlan& get(int n);  // cached per size
};

// In-place FFT of one contiguous row of length plan.n.
void fft_row(cd* row, const FftPlan& plan, FftDir dir);

// Batched FFT along the contiguous axis: nrow independent rows of length
// plan.n, parallel over rows.
void fft_rows(cd* data, int nrow, const FftPlan& plan, FftDir dir);

// Batched FFT along the strided axis: plan.n rows of length ncol, transforms
// every column, vectorized across the contiguous index and parallel over
// column blocks.
void fft_cols(cd* data, int ncol, const FftPlan& plan, FftDir dir);

}  // namespace dsim
