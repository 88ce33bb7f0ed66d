#include "dsim/core/params.hpp"

#include <cmath>

namespace dsim {

double critical_distance(const EitParams& eit, const InteractionParams& inter, RydbergState a) {
    if (!(eit.omega_c > 0.0))
        throw std::domain_error("critical_distance: omega_c must be > 0");
    if (!(eit.gamma_p > 0.0))
        throw std::domain_error("critical_distance: gamma_p must be > 0");
    const double c = inter.coefficient(a);
    if (c == 0.0) return 0.0;
    const int eta = InteractionParams::exponent(a);
    return std::pow(std::abs(c) * eit.gamma_p / (eit.omega_c * eit.omega_c), 1.0 / eta);
}

}  // namespace dsim
