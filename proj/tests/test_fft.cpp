#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "dsim/core/rng.hpp"
#include "dsim/fft/fft.hpp"

using namespace dsim;

namespace {

// Reference O(n^2) DFT, forward convention exp(-2 pi i j k / n).
std::vector<cd> dft(const std::vector<cd>& in) {
    const size_t n = in.size();
    std::vector<cd> out(n);
    for (size_t k = 0; k < n; ++k) {
        cd s{};
        for (size_t j = 0; j < n; ++j) {
            const double ang = -2.0 * std::numbers::pi * double(j * k % n) / double(n);
            s += in[j] * cd(std::cos(ang), std::sin(ang));
        }
        out[k] = s;
    }
    return out;
}

}  // namespace

TEST_CASE("fft_row matches the direct DFT and inverts") {
    for (int n : {8, 64, 256}) {
        Xoshiro256pp rng(n);
        std::vector<cd> v(n);
        for (auto& z : v) z = cd(rng.uniform(-1, 1), rng.uniform(-1, 1));
        auto f = v;
        const auto& plan = FftPlan::get(n);
        fft_row(f.data(), plan, FftDir::forward);
        const auto ref = dft(v);
        for (int i = 0; i < n; ++i) CHECK(std::abs(f[i] - ref[i]) < 1e-10 * n);

        fft_row(f.data(), plan, FftDir::inverse);
        for (int i = 0; i < n; ++i) CHECK(std::abs(f[i] / double(n) - v[i]) < 1e-12 * n);
    }
}

TEST_CASE("fft_cols equals per-column fft_row") {
    const int n = 32, ncol = 20;
    Xoshiro256pp rng(7);
    std::vector<cd> a(static_cast<size_t>(n) * ncol);
    for (auto& z : a) z = cd(rng.uniform(-1, 1), rng.uniform(-1, 1));
    auto b = a;

    const auto& plan = FftPlan::get(n);
    fft_cols(b.data(), ncol, plan, FftDir::forward);

    for (int c = 0; c < ncol; ++c) {
        std::vector<cd> col(n);
        for (int i = 0; i < n; ++i) col[i] = a[static_cast<size_t>(i) * ncol + c];
        fft_row(col.data(), plan, FftDir::forward);
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(col[i] - b[static_cast<size_t>(i) * ncol + c]) < 1e-11);
    }
}

TEST_CASE("spectral derivative of a plane wave is exact") {
    const int n = 128;
    const double L = 4.0;
    const auto& plan = FftPlan::get(n);
    const double k1 = 2.0 * std::numbers::pi / L * 5;  // mode 5
    std::vector<cd> v(n);
    for (int i = 0; i < n; ++i) {
        const double x = L * i / n;
        v[i] = std::exp(cd(0, k1 * x));
    }
    auto f = v;
    fft_row(f.data(), plan, FftDir::forward);
    // multiply by -k^2
    const double dk = 2.0 * std::numbers::pi / L;
    for (int j = 0; j < n; ++j) {
        const double k = dk * (j < n / 2 ? j : j - n);
        f[j] *= -k * k;
    }
    fft_row(f.data(), plan, FftDir::inverse);
    for (int i = 0; i < n; ++i) CHECK(std::abs(f[i] / double(n) + k1 * k1 * v[i]) < 1e-9);
}
