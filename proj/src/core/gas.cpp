#include "dsim/core/gas.hpp"

#include <stdexcept>

#include "dsim/core/rng.hpp"

namespace dsim {

BackgroundGas sample_background(const BoxGeometry& geometry, double density_per_m3,
                                uint64_t seed) {
    if (!(geometry.extent.x > 0 && geometry.extent.y > 0 && geometry.extent.z > 0))
        throw std::invalid_argument("sample_background: box extents must be positive");
    if (!(density_per_m3 > 0))
        throw std::invalid_argument("sample_background: density must be positive");

    const double volume_m3 = geometry.volume_um3() * 1e-18;
    const auto count = static_cast<long long>(std::llround(density_per_m3 * volume_m3));
    if (count <= 0)
        throw std::invalid_argument("sample_background: degenerate medium, zero atoms in box");

    BackgroundGas gas;
    gas.geometry = geometry;
    gas.density_per_m3 = density_per_m3;
    gas.seed = seed;
    gas.positions.reserve(static_cast<size_t>(count));

    Xoshiro256pp rng(seed);
    const Vec3 lo{geometry.center.x - 0.5 * geometry.extent.x,
                  geometry.center.y - 0.5 * geometry.extent.y,
                  geometry.center.z - 0.5 * geometry.extent.z};
    for (long long i = 0; i < count; ++i) {
        Vec3 p;
        p.x = lo.x + geometry.extent.x * rng.uniform();
        p.y = lo.y + geometry.extent.y * rng.uniform();
        p.z = lo.z + geometry.extent.z * rng.uniform();
        gas.positions.push_back(p);
    }
    return gas;
}

}  // namespace dsim
