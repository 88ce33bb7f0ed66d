#include "dsim/lin/cmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsim {

using cd = std::complex<double>;

CMatrix CMatrix::identity(int dim) {
    CMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::adjoint() const {
    CMatrix m(d_);
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
}

cd CMatrix::trace() const {
    cd t = 0;
    for (int i = 0; i < d_; ++i) t += (*this)(i, i);
    return t;
}

double CMatrix::max_abs() const {
    double m = 0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
}

double CMatrix::hermiticity_defect() const {
    double m = 0;
    for (int i = 0; i < d_; ++i)
        for (int j = i; j < d_; ++j)
            m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

CMatrix& CMatrix::operator*=(cd s) {
    for (auto& v : a_) v *= s;
    return *this;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    CMatrix c(a.d_);
    c.add_product(a, b);
    return c;
}

void CMatrix::add_product(const CMatrix& a, const CMatrix& b, cd s) {
    const int d = a.d_;
    for (int i = 0; i < d; ++i) {
        cd* ci = &a_[static_cast<size_t>(i) * d];
        for (int k = 0; k < d; ++k) {
            const cd aik = s * a(i, k);
            if (aik == cd{}) continue;
            const cd* bk = &b.a_[static_cast<size_t>(k) * d];
            for (int j = 0; j < d; ++j) ci[j] += aik * bk[j];
        }
    }
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    const int da = a.dim(), db = b.dim();
    CMatrix c(da * db);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j) {
            const cd aij = a(i, j);
            if (aij == cd{}) continue;
            for (int k = 0; k < db; ++k)
                for (int l = 0; l < db; ++l) c(i * db + k, j * db + l) = aij * b(k, l);
        }
    return c;
}

namespace {

// LU with partial pivoting, in place. Returns |det|; fills perm.
double lu_factor(CMatrix& a, std::vector<int>& perm) {
    const int d = a.dim();
    perm.resize(d);
    double absdet = 1.0;
    for (int i = 0; i < d; ++i) perm[i] = i;
    for (int c = 0; c < d; ++c) {
        int piv = c;
        double best = std::abs(a(c, c));
        for (int r = c + 1; r < d; ++r)
            if (std::abs(a(r, c)) > best) { best = std::abs(a(r, c)); piv = r; }
        if (best == 0.0) throw std::domain_error("lu_solve: singular matrix");
        if (piv != c) {
            for (int j = 0; j < d; ++j) std::swap(a(c, j), a(piv, j));
            std::swap(perm[c], perm[piv]);
        }
        absdet *= best;
        const cd inv = 1.0 / a(c, c);
        for (int r = c + 1; r < d; ++r) {
            const cd f = a(r, c) * inv;
            a(r, c) = f;
            for (int j = c + 1; j < d; ++j) a(r, j) -= f * a(c, j);
        }
    }
    return absdet;
}

void lu_substitute(const CMatrix& lu, const std::vector<int>& perm, std::vector<cd>& b) {
    const int d = lu.dim();
    std::vector<cd> x(d);
    for (int i = 0; i < d; ++i) x[i] = b[perm[i]];
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
    for (int i = d - 1; i >= 0; --i) {
        for (int j = i + 1; j < d; ++j) x[i] -= lu(i, j) * x[j];
        x[i] /= lu(i, i);
    }
    b = std::move(x);
}

}  // namespace

double lu_solve(CMatrix a, std::vector<cd>& b) {
    std::vector<int> perm;
    const double absdet = lu_factor(a, perm);
    lu_substitute(a, perm, b);
    return absdet;
}

void lu_solve_matrix(CMatrix a, CMatrix& b) {
    std::vector<int> perm;
    lu_factor(a, perm);
    const int d = a.dim();
    std::vector<cd> col(d);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) col[i] = b(i, j);
        lu_substitute(a, perm, col);
        for (int i = 0; i < d; ++i) b(i, j) = col[i];
    }
}

std::vector<double> hermitian_eigenvalues(CMatrix a) {
    const int d = a.dim();
    // Cyclic complex Jacobi: annihilate a_pq with a unitary 2x2 rotation.
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += std::norm(a(p, q));
        if (off < 1e-26) break;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) {
                const cd apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double app = a(p, p).real(), aqq = a(q, q).real();
                const double b = std::abs(apq);
                const cd eiphi = apq / b;  // a_pq = b e^{i phi}
                const double theta = 0.5 * std::atan2(2.0 * b, app - aqq);
                const double c = std::cos(theta), s = std::sin(theta);
                // A <- R^dag A R with R(p,p)=c, R(p,q)=-s e^{i phi},
                // R(q,p)=s e^{-i phi}, R(q,q)=c; zeroes A'(p,q).
                for (int i = 0; i < d; ++i) {  // A <- A R
                    const cd aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip + s * std::conj(eiphi) * aiq;
                    a(i, q) = -s * eiphi * aip + c * aiq;
                }
                for (int i = 0; i < d; ++i) {  // A <- R^dag A
                    const cd api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api + s * eiphi * aqi;
                    a(q, i) = -s * std::conj(eiphi) * api + c * aqi;
                }
            }
    }
    std::vector<double> ev(d);
    for (int i = 0; i < d; ++i) ev[i] = a(i, i).real();
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace dsim
