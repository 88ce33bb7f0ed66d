#pragma once

#include <complex>
#include <vector>

namespace dsim {

// Uniform periodic grid; n a power of two so the kinetic term can use the
// radix-2 spectral transform. Points x_i = min + i*dx, i = 0..n-1; the
// conjugate momentum grid is the standard DFT dual with k_max = pi/dx.
struct Grid1D {
    double min = 0.0;
    double max = 0.0;
    int n = 0;

    static Grid1D make(double min, double max, int n);

    double dx() const { return (max - min) / n; }
    double x(int i) const { return min + i * dx(); }
    double kmax() const;
    // k values in DFT storage order (0..n/2-1 positive, then negative).
    std::vector<double> k_values() const;
    std::vector<double> x_values() const;

    bool operator==(const Grid1D&) const = default;
};

// Discretised Gaussian packet exp[-(x-x0)^2/(2 sigma^2)] / (pi sigma^2)^(1/4).
// Unit L2 norm on the grid to 1e-6 when the tails fit in the domain.
std::vector<std::complex<double>> gaussian_packet(const Grid1D& grid, double center,
                                                  double sigma);

enum class DimerSurface { repulsive, attractive, bare_state };

struct WavepacketSpec {
    double center = 0.0;  // um
    double sigma = 0.0;   // um
    DimerSurface surface = DimerSurface::repulsive;
};

}  // namespace dsim
