#pragma once

#include <complex>
#include <cstddef>

// Data-parallel inner loops shared by the FFT, kernel assembly and the
// density-matrix steppers. Every op has a scalar reference implementation
// and an AVX2 variant; the active table is selected once at runtime from
// cpuid (see dispatch.cpp) and the two lanes are equivalence-tested.

namespace dsim::simd {

using cd = std::complex<double>;
using cf = std::complex<float>;

struct Ops {
    const char* name;

    // FFT butterfly, constant twiddle: (a, b) <- (a + w b, a - w b).
    void (*bf_const)(cd* a, cd* b, cd w, size_t n);
    // FFT butterfly with a per-element twiddle table.
    void (*bf_table)(cd* a, cd* b, const cd* w, size_t n);

    // y += a x  (real a)
    void (*axpy_re)(cd* y, double a, const cd* x, size_t n);
    // dst = x + a k  (real a)
    void (*assign_axpy)(cd* dst, const cd* x, double a, const cd* k, size_t n);
    // a *= s
    void (*scale_re)(cd* a, double s, size_t n);

    // Spectral kinetic factor: row[j] *= i * coef * (k2[j] - k2row).
    void (*kin_mul_row)(cd* row, const double* k2, double k2row, double coef, size_t n);

    // Single-particle kernel term: dst[j] += (-g[j]/2 + i(depp[j]-dep[j])) rho[j].
    // dep enters with a minus sign: the commutator -i[h,rho] contributes
    // -i (h(x)-h(x')) rho while dep stores h(x)-h(x').
    void (*apply_k1_row)(cd* dst, const cd* rho, const double* g, const double* dep,
                         const double* depp, size_t n);

    // Dimer kernel term, combined complex64 slab: dst[j] += K[j] * rho[j].
    void (*apply_k2_row)(cd* dst, const cf* K, const cd* rho, size_t n);

    // Rank-1 outer-product accumulation: row[j] += a * conj(v[j]).
    void (*rank1_accum)(cd* row, cd a, const cd* v, size_t n);

    // Dipole-dipole coupling: dst[j] += -i (wrow a[j] - w[j] b[j]).
    void (*w_couple_row)(cd* dst, const cd* a, const cd* b, double wrow, const double* w,
                         size_t n);

    // Absorbing mask: row[j] *= s * m[j].
    void (*mul_real_row)(cd* row, double s, const double* m, size_t n);
};

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when unsupported by the build/CPU

// Active table: AVX2 when the CPU supports it, overridable with
// DSIM_SIMD=scalar|avx2 in the environment (read once).
const Ops& ops();

}  // namespace dsim::simd
