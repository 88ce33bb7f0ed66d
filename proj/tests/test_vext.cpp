#include <doctest.h>

#include <cmath>

#include "dsim/maps/kernels.hpp"

using namespace dsim;

TEST_CASE("fitting an exact even polynomial recovers the coefficients") {
    const std::array<double, 5> truth{-0.12885, -0.0095, -0.0164, 0.0023, 0.00374};
    std::vector<double> x, h;
    for (int i = 0; i < 240; ++i) {
        const double xi = -6.0 + 12.0 * i / 239.0;
        x.push_back(xi);
        double v = 0, p = 1;
        for (double c : truth) { v += c * p; p *= xi * xi; }
        h.push_back(-v);  // fit_vext fits -h_eff
    }
    const auto fit = fit_vext(x, h);
    for (int k = 0; k < 5; ++k)
        CHECK(fit.coeff[k] == doctest::Approx(truth[k]).epsilon(1e-10));
    CHECK(fit.rms_residual < 1e-10);
}

TEST_CASE("reported residual equals the RMS of v_ext + h_eff") {
    std::vector<double> x, h;
    for (int i = 0; i < 101; ++i) {
        const double xi = -5.0 + 0.1 * i;
        x.push_back(xi);
        h.push_back(0.3 * xi * xi - 0.02 * std::sin(3 * xi));  // not exactly even-poly
    }
    const auto fit = fit_vext(x, h);
    double ss = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double r = fit(x[i]) + h[i];
        ss += r * r;
    }
    CHECK(fit.rms_residual == doctest::Approx(std::sqrt(ss / x.size())).epsilon(1e-12));
}

TEST_CASE("degenerate input is rejected") {
    std::vector<double> x(60, 1.0), h(60, 0.5);
    CHECK_THROWS(fit_vext(x, h));
    CHECK_THROWS(fit_vext({0, 1, 2}, {1, 2, 3}));  // too few samples
}
