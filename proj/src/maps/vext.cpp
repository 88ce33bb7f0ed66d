#include <cmath>
#include <stdexcept>

#include "dsim/maps/kernels.hpp"

namespace dsim {

namespace {

// Householder QR least squares for a small, dense, column-scaled system.
std::array<double, 5> qr_solve(std::vector<std::array<double, 5>>& a, std::vector<double>& b) {
    const size_t m = a.size();
    for (int c = 0; c < 5; ++c) {
        double norm = 0;
        for (size_t r = c; r < m; ++r) norm += a[r][c] * a[r][c];
        norm = std::sqrt(norm);
        if (norm < 1e-13)
            throw std::runtime_error("fit_vext: rank-deficient design matrix");
        if (a[c][c] > 0) norm = -norm;
        const double v0 = a[c][c] - norm;
        std::vector<double> v(m - c);
        v[0] = v0;
        for (size_t r = c + 1; r < m; ++r) v[r - c] = a[r][c];
        double vtv = 0;
        for (double x : v) vtv += x * x;
        if (vtv == 0) continue;
        for (int cc = c; cc < 5; ++cc) {
            double dot = 0;
            for (size_t r = c; r < m; ++r) dot += v[r - c] * a[r][cc];
            const double f = 2.0 * dot / vtv;
            for (size_t r = c; r < m; ++r) a[r][cc] -= f * v[r - c];
        }
        double dot = 0;
        for (size_t r = c; r < m; ++r) dot += v[r - c] * b[r];
        const double f = 2.0 * dot / vtv;
        for (size_t r = c; r < m; ++r) b[r] -= f * v[r - c];
    }
    std::array<double, 5> x{};
    for (int i = 4; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < 5; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace

ExternalPotential fit_vext(const std::vector<double>& x, const std::vector<double>& h_eff) {
    if (x.size() != h_eff.size() || x.size() < 50)
        throw std::invalid_argument("fit_vext: need >= 50 samples spanning the well");
    const size_t m = x.size();
    double xmax = 0;
    for (double v : x) xmax = std::max(xmax, std::abs(v));
    if (xmax == 0) throw std::invalid_argument("fit_vext: degenerate abscissa");

    // Columns (x/xmax)^{2k}, k = 0..4, keep the normal equations tame.
    std::vector<std::array<double, 5>> a(m);
    std::vector<double> b(m);
    for (size_t r = 0; r < m; ++r) {
        const double u = (x[r] / xmax) * (x[r] / xmax);
        double p = 1;
        for (int k = 0; k < 5; ++k) {
            a[r][k] = p;
            p *= u;
        }
        b[r] = -h_eff[r];
    }
    const auto scaled = qr_solve(a, b);

    ExternalPotential out;
    double scale = 1.0;
    for (int k = 0; k < 5; ++k) {
        out.coeff[k] = scaled[k] / scale;
        scale *= xmax * xmax;
    }
    double ss = 0;
    for (size_t r = 0; r < m; ++r) {
        const double res = out(x[r]) + h_eff[r];
        ss += res * res;
    }
    out.rms_residual = std::sqrt(ss / m);
    return out;
}

}  // namespace dsim
