#include <doctest.h>

#include <cmath>

#include "dsim/core/rng.hpp"
#include "dsim/lin/cmatrix.hpp"

using namespace dsim;
using cd = std::complex<double>;

namespace {
CMatrix random_matrix(int d, uint64_t seed) {
    Xoshiro256pp rng(seed);
    CMatrix m(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = cd(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return m;
}
}  // namespace

TEST_CASE("lu solve round trip") {
    const int d = 7;
    const CMatrix a = random_matrix(d, 3);
    std::vector<cd> x(d);
    Xoshiro256pp rng(5);
    for (auto& v : x) v = cd(rng.uniform(-1, 1), rng.uniform(-1, 1));
    std::vector<cd> b(d, cd{});
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) b[i] += a(i, j) * x[j];
    lu_solve(a, b);
    for (int i = 0; i < d; ++i) CHECK(std::abs(b[i] - x[i]) < 1e-11);
}

TEST_CASE("kron dimensions and values") {
    CMatrix a(2), b(2);
    a(0, 1) = 2.0;
    b(1, 0) = cd(0, 3.0);
    const CMatrix k = kron(a, b);
    CHECK(k.dim() == 4);
    CHECK(k(1, 2) == cd(0, 6.0));  // (0,1)x(1,0)
    CHECK(k(0, 0) == cd(0, 0));
}

TEST_CASE("hermitian eigenvalues via Jacobi") {
    // 2x2 with known spectrum.
    CMatrix m(2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    m(0, 1) = cd(0, 2.0);
    m(1, 0) = cd(0, -2.0);
    const auto ev = hermitian_eigenvalues(m);
    CHECK(ev[0] == doctest::Approx(-std::sqrt(5.0)).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));

    // random Hermitian: eigenvalue sum = trace, sum of squares = ||A||_F^2
    const int d = 12;
    CMatrix r = random_matrix(d, 17);
    CMatrix h(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) h(i, j) = 0.5 * (r(i, j) + std::conj(r(j, i)));
    const auto ev2 = hermitian_eigenvalues(h);
    double sum = 0, sq = 0, fro = 0;
    for (double e : ev2) { sum += e; sq += e * e; }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) fro += std::norm(h(i, j));
    CHECK(sum == doctest::Approx(h.trace().real()).epsilon(1e-10));
    CHECK(sq == doctest::Approx(fro).epsilon(1e-10));
}
