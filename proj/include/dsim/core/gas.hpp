#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace dsim {

struct Vec3 {
    double x = 0, y = 0, z = 0;
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool operator==(const Vec3&) const = default;
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Axis-aligned box: center plus full extents per axis.
struct BoxGeometry {
    Vec3 center{};
    Vec3 extent{};  // full side lengths, um
    double volume_um3() const { return extent.x * extent.y * extent.z; }
    bool contains(const Vec3& p) const {
        return std::abs(p.x - center.x) <= 0.5 * extent.x &&
               std::abs(p.y - center.y) <= 0.5 * extent.y &&
               std::abs(p.z - center.z) <= 0.5 * extent.z;
    }
    bool operator==(const BoxGeometry&) const = default;
};

// Static positions of the interrogating medium. Immutable after sampling.
struct BackgroundGas {
    std::vector<Vec3> positions;
    BoxGeometry geometry;
    double density_per_m3 = 0.0;
    uint64_t seed = 0;
};

// i.i.d. uniform positions in the box, count = round(density * volume).
// Sampling is single-threaded and draws x, y, z per atom in that order from
// xoshiro256++(seed), so identical inputs give bit-identical positions.
BackgroundGas sample_background(const BoxGeometry& geometry, double density_per_m3,
                                uint64_t seed);

}  // namespace dsim
