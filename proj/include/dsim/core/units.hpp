#pragma once

#include <cmath>
#include <stdexcept>

// Internal unit system: lengths in micrometre, times in microsecond,
// frequencies/energies angular (rad/us) with hbar = 1, so energy and
// angular frequency coincide. Tabulated "/2pi" MHz values are converted
// exactly once, at config parse, never inside the numerics.

namespace dsim {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// hbar/M for 87Rb in um^2/us (hbar = 1.054571817e-34 J s,
// M = 86.909180531 u = 1.44316060e-25 kg).
inline constexpr double kHbarOverMassRb87 = 7.3074e-4;

struct UnitSystem {
    // hbar/M of the moving Rydberg atom species, um^2/us.
    double hbar_over_mass = kHbarOverMassRb87;

    void validate() const {
        if (!(hbar_over_mass > 0.0))
            throw std::invalid_argument("UnitSystem: hbar_over_mass must be > 0");
    }
};

// f quoted as "f MHz" in the /2pi convention -> angular rad/us.
inline double angular_from_mhz(double f_mhz_over_2pi) {
    return kTwoPi * f_mhz_over_2pi;
}
inline double mhz_from_angular(double omega) { return omega / kTwoPi; }

}  // namespace dsim
