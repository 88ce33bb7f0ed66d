#pragma once

#include <stdexcept>
#include <string>

#include "dsim/core/units.hpp"

namespace dsim {

// All members angular rad/us.
struct EitParams {
    double omega_p = 0.0;  // probe Rabi
    double omega_c = 0.0;  // coupling Rabi
    double delta_p = 0.0;  // probe detuning
    double delta_c = 0.0;  // coupling detuning
    double gamma_p = 0.0;  // decay rate of |e>

    // Returns a human-readable warning ("" if none). Weak-probe EIT needs
    // omega_p << omega_c; outside that regime results are still computed.
    std::string validate() const {
        if (!(omega_c > 0.0)) throw std::invalid_argument("EitParams: omega_c must be > 0");
        if (!(gamma_p > 0.0)) throw std::invalid_argument("EitParams: gamma_p must be > 0");
        if (omega_p >= omega_c)
            return "warning: omega_p >= omega_c, outside the weak-probe EIT regime";
        return {};
    }
};

enum class RydbergState { s, p };

// Background-gas <-> Rydberg interaction coefficients, angular units:
// rad/us * um^eta.  eta(s)=6, eta(p)=4; c3_dd couples the dimer states.
struct InteractionParams {
    double c6_us = 0.0;
    double c4_up = 0.0;
    double c3_dd = 0.0;

    double coefficient(RydbergState a) const { return a == RydbergState::s ? c6_us : c4_up; }
    static int exponent(RydbergState a) { return a == RydbergState::s ? 6 : 4; }
};

// Radius of the absorption shadow around a Rydberg atom in state `a`:
// d_c = (|C_eta| Gamma_p / Omega_c^2)^(1/eta).  Zero coefficient -> no shadow.
double critical_distance(const EitParams& eit, const InteractionParams& inter, RydbergState a);

}  // namespace dsim
