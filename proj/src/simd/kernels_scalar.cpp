#include "dsim/simd/kernels.hpp"

namespace dsim::simd {
namespace scalar {

void bf_const(cd* a, cd* b, cd w, size_t n) {
    for (size_t j = 0; j < n; ++j) {
        const cd t = w * b[j];
        const cd u = a[j];
        a[j] = u + t;
        b[j] = u - t;
    }
}

void bf_table(cd* a, cd* b, const cd* w, size_t n) {
    for (size_t j = 0; j < n; ++j) {
        const cd t = w[j] * b[j];
        const cd u = a[j];
        a[j] = u + t;
        b[j] = u - t;
    }
}

void axpy_re(cd* y, double a, const cd* x, size_t n) {
    for (size_t j = 0; j < n; ++j) y[j] += a * x[j];
}

void assign_axpy(cd* dst, const cd* x, double a, const cd* k, size_t n) {
    for (size_t j = 0; j < n; ++j) dst[j] = x[j] + a * k[j];
}

void scale_re(cd* a, double s, size_t n) {
    for (size_t j = 0; j < n; ++j) a[j] *= s;
}

void kin_mul_row(cd* row, const double* k2, double k2row, double coef, size_t n) {
    for (size_t j = 0; j < n; ++j) {
        const double g = coef * (k2[j] - k2row);
        row[j] = cd(-row[j].imag() * g, row[j].real() * g);
    }
}

void apply_k1_row(cd* dst, const cd* rho, const double* g, const double* dep,
                  const double* depp, size_t n) {
    for (size_t j = 0; j < n; ++j) {
        const double cr = -0.5 * g[j];
        const double ci = depp[j] - dep[j];
        const cd r = rho[j];
        dst[j] += cd(cr * r.real() - ci * r.imag(), cr * r.imag() + ci * r.real());
    }
}

void apply_k2_row(cd* dst, const cf* K, const cd* rho, size_t n) {
    for (size_t j = 0; j < n; ++j) {
        const double cr = K[j].real();
        const double ci = K[j].imag();
        const cd r = rho[j];
        dst[j] += cd(cr * r.real() - ci * r.imag(), cr * r.imag() + ci * r.real());
    }
}

void rank1_accum(cd* row, cd a, const cd* v, size_t n) {
    const double ar = a.real(), ai = a.imag();
    for (size_t j = 0; j < n; ++j) {
        const double vr = v[j].real(), vi = v[j].imag();
        row[j] += cd(ar * vr + ai * vi, ai * vr - ar * vi);
    }
}

void w_couple_row(cd* dst, const cd* a, const cd* b, double wrow, const double* w,
                  size_t n) {
    for (size_t j = 0; j < n; ++j) {
        const cd u = wrow * a[j] - w[j] * b[j];
        dst[j] += cd(u.imag(), -u.real());
    }
}

void mul_real_row(cd* row, double s, const double* m, size_t n) {
    for (size_t j = 0; j < n; ++j) row[j] *= s * m[j];
}

}  // namespace scalar

const Ops& scalar_ops() {
    static const Ops table{
        "scalar",         scalar::bf_const,    scalar::bf_table,     scalar::axpy_re,
        scalar::assign_axpy, scalar::scale_re, scalar::kin_mul_row,  scalar::apply_k1_row,
        scalar::apply_k2_row, scalar::rank1_accum, scalar::w_couple_row, scalar::mul_real_row,
    };
    return table;
}

}  // namespace dsim::simd
