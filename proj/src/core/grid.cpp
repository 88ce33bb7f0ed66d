#include "dsim/core/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dsim {

Grid1D Grid1D::make(double min, double max, int n) {
    if (!(max > min)) throw std::invalid_argument("Grid1D: max must exceed min");
    if (n < 2 || (n & (n - 1)) != 0)
        throw std::invalid_argument("Grid1D: n must be a power of two >= 2");
    return Grid1D{min, max, n};
}

double Grid1D::kmax() const { return std::numbers::pi / dx(); }

std::vector<double> Grid1D::k_values() const {
    std::vector<double> k(n);
    const double dk = 2.0 * std::numbers::pi / (max - min);
    for (int j = 0; j < n; ++j) k[j] = dk * (j < n / 2 ? j : j - n);
    return k;
}

std::vector<double> Grid1D::x_values() const {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = x(i);
    return xs;
}

std::vector<std::complex<double>> gaussian_packet(const Grid1D& grid, double center,
                                                  double sigma) {
    if (!(sigma > 0)) throw std::invalid_argument("gaussian_packet: sigma must be > 0");
    std::vector<std::complex<double>> psi(grid.n);
    const double norm = std::pow(std::numbers::pi * sigma * sigma, -0.25);
    for (int i = 0; i < grid.n; ++i) {
        const double u = (grid.x(i) - center) / sigma;
        psi[i] = norm * std::exp(-0.5 * u * u);
    }
    return psi;
}

}  // namespace dsim
