#include <doctest.h>

#include <cmath>
#include <vector>

#include "dsim/core/parallel.hpp"
#include "dsim/core/rng.hpp"
#include "dsim/simd/kernels.hpp"

using namespace dsim;
using simd::cd;
using simd::cf;

namespace {

std::vector<cd> random_cvec(size_t n, uint64_t seed) {
    Xoshiro256pp rng(seed);
    std::vector<cd> v(n);
    for (auto& z : v) z = cd(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return v;
}

std::vector<double> random_rvec(size_t n, uint64_t seed) {
    Xoshiro256pp rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1, 1);
    return v;
}

void check_close(const std::vector<cd>& a, const std::vector<cd>& b, double tol = 1e-14) {
    REQUIRE(a.size() == b.size());
    double scale = 1e-30;
    for (const auto& z : a) scale = std::max(scale, std::abs(z));
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a[i] - b[i]) <= tol * scale);
    }
}

}  // namespace

// Every op: AVX2 lane against the scalar reference on awkward lengths
// (vector width multiples plus tails).
TEST_CASE("simd lane equivalence") {
    const auto* avx = simd::avx2_ops();
    if (!avx) {
        MESSAGE("AVX2 lane not compiled/supported; skipping equivalence");
        return;
    }
    const auto& ref = simd::scalar_ops();

    for (size_t n : {1u, 2u, 3u, 7u, 64u, 257u}) {
        CAPTURE(n);
        const auto a0 = random_cvec(n, 11 * n + 1);
        const auto b0 = random_cvec(n, 22 * n + 2);
        const auto w = random_cvec(n, 33 * n + 3);
        const auto g = random_rvec(n, 44 * n + 4);
        const auto dep = random_rvec(n, 55 * n + 5);
        const auto depp = random_rvec(n, 66 * n + 6);

        {
            auto a1 = a0, b1 = b0, a2 = a0, b2 = b0;
            ref.bf_const(a1.data(), b1.data(), w[0], n);
            avx->bf_const(a2.data(), b2.data(), w[0], n);
            check_close(a1, a2);
            check_close(b1, b2);
        }
        {
            auto a1 = a0, b1 = b0, a2 = a0, b2 = b0;
            ref.bf_table(a1.data(), b1.data(), w.data(), n);
            avx->bf_table(a2.data(), b2.data(), w.data(), n);
            check_close(a1, a2);
            check_close(b1, b2);
        }
        {
            auto y1 = a0, y2 = a0;
            ref.axpy_re(y1.data(), 0.37, b0.data(), n);
            avx->axpy_re(y2.data(), 0.37, b0.data(), n);
            check_close(y1, y2);
        }
        {
            std::vector<cd> d1(n), d2(n);
            ref.assign_axpy(d1.data(), a0.data(), -1.21, b0.data(), n);
            avx->assign_axpy(d2.data(), a0.data(), -1.21, b0.data(), n);
            check_close(d1, d2);
        }
        {
            auto y1 = a0, y2 = a0;
            ref.scale_re(y1.data(), 0.77, n);
            avx->scale_re(y2.data(), 0.77, n);
            check_close(y1, y2);
        }
        {
            auto y1 = a0, y2 = a0;
            ref.kin_mul_row(y1.data(), g.data(), 0.31, -2.5, n);
            avx->kin_mul_row(y2.data(), g.data(), 0.31, -2.5, n);
            check_close(y1, y2);
        }
        {
            auto y1 = a0, y2 = a0;
            ref.apply_k1_row(y1.data(), b0.data(), g.data(), dep.data(), depp.data(), n);
            avx->apply_k1_row(y2.data(), b0.data(), g.data(), dep.data(), depp.data(), n);
            check_close(y1, y2);
        }
        {
            std::vector<cf> K(n);
            for (size_t i = 0; i < n; ++i) K[i] = cf(float(dep[i]), float(depp[i]));
            auto y1 = a0, y2 = a0;
            ref.apply_k2_row(y1.data(), K.data(), b0.data(), n);
            avx->apply_k2_row(y2.data(), K.data(), b0.data(), n);
            check_close(y1, y2);
        }
        {
            auto y1 = a0, y2 = a0;
            ref.rank1_accum(y1.data(), w[0], b0.data(), n);
            avx->rank1_accum(y2.data(), w[0], b0.data(), n);
            check_close(y1, y2);
        }
        {
            auto y1 = a0, y2 = a0;
            ref.w_couple_row(y1.data(), b0.data(), w.data(), 0.9, g.data(), n);
            avx->w_couple_row(y2.data(), b0.data(), w.data(), 0.9, g.data(), n);
            check_close(y1, y2);
        }
        {
            auto y1 = a0, y2 = a0;
            ref.mul_real_row(y1.data(), 0.5, g.data(), n);
            avx->mul_real_row(y2.data(), 0.5, g.data(), n);
            check_close(y1, y2);
        }
    }
}

TEST_CASE("rank1_accum implements row += a conj(v)") {
    const auto& ops = simd::ops();
    std::vector<cd> row(3, cd(1.0, -2.0));
    const std::vector<cd> v{{2.0, 1.0}, {0.0, -3.0}, {1.5, 0.5}};
    const cd a(0.5, 2.0);
    ops.rank1_accum(row.data(), a, v.data(), 3);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(row[i] - (cd(1.0, -2.0) + a * std::conj(v[i]))) < 1e-15);
}

TEST_CASE("deterministic reductions are thread-count independent") {
    const auto v = random_rvec(100000, 99);
    set_thread_count(1);
    const double s1 = det_sum(v);
    set_thread_count(4);
    const double s4 = det_sum(v);
    set_thread_count(0);
    CHECK(s1 == s4);  // bitwise
    double plain = 0;
    for (double x : v) plain += x;
    CHECK(s1 == doctest::Approx(plain).epsilon(1e-12));
}
