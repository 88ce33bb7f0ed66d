// AVX2/FMA lane. Two complex<double> per 256-bit vector, packed (re, im).
// Compiled with -mavx2 -mfma; only dispatched to when cpuid reports support.

#include "dsim/simd/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace dsim::simd {
namespace scalar {
// Tail handlers from the reference lane.
void bf_const(cd*, cd*, cd, size_t);
void bf_table(cd*, cd*, const cd*, size_t);
void axpy_re(cd*, double, const cd*, size_t);
void assign_axpy(cd*, const cd*, double, const cd*, size_t);
void scale_re(cd*, double, size_t);
void kin_mul_row(cd*, const double*, double, double, size_t);
void apply_k1_row(cd*, const cd*, const double*, const double*, const double*, size_t);
void apply_k2_row(cd*, const cf*, const cd*, size_t);
void rank1_accum(cd*, cd, const cd*, size_t);
void w_couple_row(cd*, const cd*, const cd*, double, const double*, size_t);
void mul_real_row(cd*, double, const double*, size_t);
}  // namespace scalar

namespace avx2 {

// w * b for packed complex: wr/wi broadcast per complex slot.
static inline __m256d cmul(__m256d b, __m256d wr, __m256d wi) {
    const __m256d bswap = _mm256_permute_pd(b, 0x5);
    return _mm256_fmaddsub_pd(b, wr, _mm256_mul_pd(bswap, wi));
}

void bf_const(cd* a, cd* b, cd w, size_t n) {
    const __m256d wr = _mm256_set1_pd(w.real());
    const __m256d wi = _mm256_set1_pd(w.imag());
    size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const __m256d va = _mm256_loadu_pd(reinterpret_cast<const double*>(a + j));
        const __m256d vb = _mm256_loadu_pd(reinterpret_cast<const double*>(b + j));
        const __m256d t = cmul(vb, wr, wi);
        _mm256_storeu_pd(reinterpret_cast<double*>(a + j), _mm256_add_pd(va, t));
        _mm256_storeu_pd(reinterpret_cast<double*>(b + j), _mm256_sub_pd(va, t));
    }
    if (j < n) scalar::bf_const(a + j, b + j, w, n - j);
}

void bf_table(cd* a, cd* b, const cd* w, size_t n) {
    size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const __m256d vw = _mm256_loadu_pd(reinterpret_cast<const double*>(w + j));
        const __m256d wr = _mm256_movedup_pd(vw);
        const __m256d wi = _mm256_permute_pd(vw, 0xF);
        const __m256d va = _mm256_loadu_pd(reinterpret_cast<const double*>(a + j));
        const __m256d vb = _mm256_loadu_pd(reinterpret_cast<const double*>(b + j));
        const __m256d t = cmul(vb, wr, wi);
        _mm256_storeu_pd(reinterpret_cast<double*>(a + j), _mm256_add_pd(va, t));
        _mm256_storeu_pd(reinterpret_cast<double*>(b + j), _mm256_sub_pd(va, t));
    }
    if (j < n) scalar::bf_table(a + j, b + j, w + j, n - j);
}

void axpy_re(cd* y, double a, const cd* x, size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const __m256d vy = _mm256_loadu_pd(reinterpret_cast<const double*>(y + j));
        const __m256d vx = _mm256_loadu_pd(reinterpret_cast<const double*>(x + j));
        _mm256_storeu_pd(reinterpret_cast<double*>(y + j), _mm256_fmadd_pd(va, vx, vy));
    }
    if (j < n) scalar::axpy_re(y + j, a, x + j, n - j);
}

void assign_axpy(cd* dst, const cd* x, double a, const cd* k, size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const __m256d vx = _mm256_loadu_pd(reinterpret_cast<const double*>(x + j));
        const __m256d vk = _mm256_loadu_pd(reinterpret_cast<const double*>(k + j));
        _mm256_storeu_pd(reinterpret_cast<double*>(dst + j), _mm256_fmadd_pd(va, vk, vx));
    }
    if (j < n) scalar::assign_axpy(dst + j, x + j, a, k + j, n - j);
}

void scale_re(cd* a, double s, size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const __m256d v = _mm256_loadu_pd(reinterpret_cast<const double*>(a + j));
        _mm256_storeu_pd(reinterpret_cast<double*>(a + j), _mm256_mul_pd(v, vs));
    }
    if (j < n) scalar::scale_re(a + j, s, n - j);
}

void kin_mul_row(cd* row, const double* k2, double k2row, double coef, size_t n) {
    const __m256d vk2row = _mm256_set1_pd(k2row);
    const __m256d vcoef = _mm256_set1_pd(coef);
    const __m256d signs = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);
    size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d g4 = _mm256_mul_pd(vcoef, _mm256_sub_pd(_mm256_loadu_pd(k2 + j), vk2row));
        const __m256d glo = _mm256_permute4x64_pd(g4, 0x50);  // g0 g0 g1 g1
        const __m256d ghi = _mm256_permute4x64_pd(g4, 0xFA);  // g2 g2 g3 g3
        __m256d v = _mm256_loadu_pd(reinterpret_cast<const double*>(row + j));
        __m256d r = _mm256_mul_pd(_mm256_permute_pd(v, 0x5), glo);
        _mm256_storeu_pd(reinterpret_cast<double*>(row + j), _mm256_xor_pd(r, signs));
        v = _mm256_loadu_pd(reinterpret_cast<const double*>(row + j + 2));
        r = _mm256_mul_pd(_mm256_permute_pd(v, 0x5), ghi);
        _mm256_storeu_pd(reinterpret_cast<double*>(row + j + 2), _mm256_xor_pd(r, signs));
    }
    if (j < n) scalar::kin_mul_row(row + j, k2 + j, k2row, coef, n - j);
}

// dst += (cr + i ci) * rho with cr, ci given per complex slot.
static inline __m256d cmul_acc(__m256d dst, __m256d rho, __m256d cr, __m256d ci) {
    const __m256d rswap = _mm256_permute_pd(rho, 0x5);
    const __m256d t = _mm256_mul_pd(rswap, ci);
    return _mm256_add_pd(dst, _mm256_fmaddsub_pd(rho, cr, t));
}

void apply_k1_row(cd* dst, const cd* rho, const double* g, const double* dep,
                  const double* depp, size_t n) {
    const __m256d mhalf = _mm256_set1_pd(-0.5);
    size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d cr4 = _mm256_mul_pd(mhalf, _mm256_loadu_pd(g + j));
        const __m256d ci4 = _mm256_sub_pd(_mm256_loadu_pd(depp + j), _mm256_loadu_pd(dep + j));
        __m256d d = _mm256_loadu_pd(reinterpret_cast<double*>(dst + j));
        __m256d r = _mm256_loadu_pd(reinterpret_cast<const double*>(rho + j));
        d = cmul_acc(d, r, _mm256_permute4x64_pd(cr4, 0x50), _mm256_permute4x64_pd(ci4, 0x50));
        _mm256_storeu_pd(reinterpret_cast<double*>(dst + j), d);
        d = _mm256_loadu_pd(reinterpret_cast<double*>(dst + j + 2));
        r = _mm256_loadu_pd(reinterpret_cast<const double*>(rho + j + 2));
        d = cmul_acc(d, r, _mm256_permute4x64_pd(cr4, 0xFA), _mm256_permute4x64_pd(ci4, 0xFA));
        _mm256_storeu_pd(reinterpret_cast<double*>(dst + j + 2), d);
    }
    if (j < n) scalar::apply_k1_row(dst + j, rho + j, g + j, dep + j, depp + j, n - j);
}

void apply_k2_row(cd* dst, const cf* K, const cd* rho, size_t n) {
    size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const __m256d k = _mm256_cvtps_pd(_mm_loadu_ps(reinterpret_cast<const float*>(K + j)));
        const __m256d cr = _mm256_movedup_pd(k);
        const __m256d ci = _mm256_permute_pd(k, 0xF);
        const __m256d r = _mm256_loadu_pd(reinterpret_cast<const double*>(rho + j));
        __m256d d = _mm256_loadu_pd(reinterpret_cast<double*>(dst + j));
        _mm256_storeu_pd(reinterpret_cast<double*>(dst + j), cmul_acc(d, r, cr, ci));
    }
    if (j < n) scalar::apply_k2_row(dst + j, K + j, rho + j, n - j);
}

void rank1_accum(cd* row, cd a, const cd* v, size_t n) {
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_set1_pd(a.imag());
    const __m256d negodd = _mm256_set_pd(-0.0, 0.0, -0.0, 0.0);
    size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const __m256d vv = _mm256_loadu_pd(reinterpret_cast<const double*>(v + j));
        const __m256d vswap = _mm256_permute_pd(vv, 0x5);
        // even: ar vr + ai vi ; odd: ai vr - ar vi. Plain mul+add (no FMA):
        // the products must round identically to the scalar lane so that the
        // a == v[j] case cancels to an exact zero imaginary part.
        const __m256d t1 = _mm256_xor_pd(_mm256_mul_pd(vv, ar), negodd);
        const __m256d res = _mm256_add_pd(_mm256_mul_pd(vswap, ai), t1);
        const __m256d r = _mm256_loadu_pd(reinterpret_cast<const double*>(row + j));
        _mm256_storeu_pd(reinterpret_cast<double*>(row + j), _mm256_add_pd(r, res));
    }
    if (j < n) scalar::rank1_accum(row + j, a, v + j, n - j);
}

void w_couple_row(cd* dst, const cd* a, const cd* b, double wrow, const double* w,
                  size_t n) {
    const __m256d vwrow = _mm256_set1_pd(wrow);
    const __m256d negodd = _mm256_set_pd(-0.0, 0.0, -0.0, 0.0);
    size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d w4 = _mm256_loadu_pd(w + j);
        const __m256d wlo = _mm256_permute4x64_pd(w4, 0x50);
        const __m256d whi = _mm256_permute4x64_pd(w4, 0xFA);
        for (int half = 0; half < 2; ++half) {
            const size_t o = j + 2 * half;
            const __m256d va = _mm256_loadu_pd(reinterpret_cast<const double*>(a + o));
            const __m256d vb = _mm256_loadu_pd(reinterpret_cast<const double*>(b + o));
            const __m256d u =
                _mm256_fmsub_pd(va, vwrow, _mm256_mul_pd(vb, half ? whi : wlo));
            // -i u: (ur, ui) -> (ui, -ur)
            const __m256d miu = _mm256_xor_pd(_mm256_permute_pd(u, 0x5), negodd);
            const __m256d d = _mm256_loadu_pd(reinterpret_cast<const double*>(dst + o));
            _mm256_storeu_pd(reinterpret_cast<double*>(dst + o), _mm256_add_pd(d, miu));
        }
    }
    if (j < n) scalar::w_couple_row(dst + j, a + j, b + j, wrow, w + j, n - j);
}

void mul_real_row(cd* row, double s, const double* m, size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d m4 = _mm256_mul_pd(vs, _mm256_loadu_pd(m + j));
        const __m256d mlo = _mm256_permute4x64_pd(m4, 0x50);
        const __m256d mhi = _mm256_permute4x64_pd(m4, 0xFA);
        __m256d v = _mm256_loadu_pd(reinterpret_cast<const double*>(row + j));
        _mm256_storeu_pd(reinterpret_cast<double*>(row + j), _mm256_mul_pd(v, mlo));
        v = _mm256_loadu_pd(reinterpret_cast<const double*>(row + j + 2));
        _mm256_storeu_pd(reinterpret_cast<double*>(row + j + 2), _mm256_mul_pd(v, mhi));
    }
    if (j < n) scalar::mul_real_row(row + j, s, m + j, n - j);
}

}  // namespace avx2

const Ops* avx2_ops() {
    static const Ops table{
        "avx2",           avx2::bf_const,    avx2::bf_table,     avx2::axpy_re,
        avx2::assign_axpy, avx2::scale_re,   avx2::kin_mul_row,  avx2::apply_k1_row,
        avx2::apply_k2_row, avx2::rank1_accum, avx2::w_couple_row, avx2::mul_real_row,
    };
    return &table;
}

}  // namespace dsim::simd

#else

namespace dsim::simd {
const Ops* avx2_ops() { return nullptr; }
}  // namespace dsim::simd

#endif
