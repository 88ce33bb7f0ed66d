#pragma once

#include <complex>
#include <vector>

namespace dsim {

// Dense row-major complex matrix. Sized for the exact few-body benchmark
// (dimension <= 162); correctness over speed.
class CMatrix {
  public:
    using cd = std::complex<double>;

    CMatrix() = default;
    explicit CMatrix(int dim) : d_(dim), a_(static_cast<size_t>(dim) * dim) {}

    static CMatrix identity(int dim);
    static CMatrix zero(int dim) { return CMatrix(dim); }

    int dim() const { return d_; }
    cd& operator()(int i, int j) { return a_[static_cast<size_t>(i) * d_ + j]; }
    const cd& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * d_ + j]; }
    cd* data() { return a_.data(); }
    const cd* data() const { return a_.data(); }

    CMatrix adjoint() const;
    cd trace() const;
    double max_abs() const;
    double hermiticity_defect() const;  // max_ij |a_ij - conj(a_ji)|

    CMatrix& operator+=(const CMatrix& o);
    CMatrix& operator-=(const CMatrix& o);
    CMatrix& operator*=(cd s);
    friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
    friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
    friend CMatrix operator*(cd s, CMatrix a) { return a *= s; }
    friend CMatrix operator*(const CMatrix& a, const CMatrix& b);

    // this += s * a * b (fused, no temporary)
    void add_product(const CMatrix& a, const CMatrix& b, cd s = {1.0, 0.0});

  private:
    int d_ = 0;
    std::vector<cd> a_;
};

// Kronecker product a (x) b.
CMatrix kron(const CMatrix& a, const CMatrix& b);

// Solves A x = b in place by LU with partial pivoting; throws on (near-)
// singular pivots. Returns |det A| as a singularity diagnostic.
double lu_solve(CMatrix a, std::vector<std::complex<double>>& b);

// General LU solve of A X = B with X, B matrices.
void lu_solve_matrix(CMatrix a, CMatrix& b);

// Eigenvalues of a Hermitian matrix via cyclic complex Jacobi rotations,
// ascending order.
std::vector<double> hermitian_eigenvalues(CMatrix a);

}  // namespace dsim
