#pragma once

#include <array>
#include <complex>

#include "dsim/core/gas.hpp"
#include "dsim/core/params.hpp"
#include "dsim/lin/cmatrix.hpp"

// Adiabatic elimination of the background {e,u} sector. For one background
// atom and N Rydberg atoms the single-excitation sector is 2N-dimensional;
// the effective Hamiltonian and decay operators on the {pi_n} space follow
// from inverting the non-Hermitian Hamiltonian once per ground eigenstate:
//   H_eff = -1/2 [ V- sum_l (H_NH - E_l)^-1 V+^l + h.c. ] + H_g
//   L_eff =        L  sum_l (H_NH - E_l)^-1 V+^l
// Operators returned here are the per-atom induced parts; H_g (the dipole-
// dipole term) stays separate so the equations of motion count it once.

namespace dsim {

using cd = std::complex<double>;

// Single Rydberg atom (N=1). v_us is the bare interaction shift
// V^(us)(X, x_alpha); Vtilde = v_us - delta_p - delta_c.
struct SingleAtomEff {
    double h = 0.0;  // effective level shift
    cd l{};          // effective decay amplitude
};

// Closed forms: h = Op^2 Oc~^2 V~ / (Oc~^4 + 4 V~^2 (|Gp~|^2 - 4 dp^2)),
// l = 2i V~ sqrt(Gp) Op / (2 V~ Gp~ - i Oc^2), with Oc~^2 = Oc^2 + 4 V~ dp,
// Gp~ = Gp - 2i dp.
SingleAtomEff closed_form_single(const EitParams& eit, double v_us);

// Same quantity through the generic elimination machinery (2x2 solve);
// cross-validates the closed forms.
SingleAtomEff effective_single_generic(const EitParams& eit, double v_us);

// Position-level convenience: Rydberg atom at (x,0,0), background at x_alpha.
SingleAtomEff closed_form_single_at(const EitParams& eit, const InteractionParams& inter,
                                    double x, const Vec3& x_alpha);

// Rydberg dimer (N=2), atoms at (-r/2,0,0) and (+r/2,0,0).
struct EffectiveAtomOperators {
    // 2x2 matrices over {pi_1, pi_2}, row-major. h is Hermitian by
    // construction (h[2] == conj(h[1])); both vanish elementwise as the
    // interaction shifts go to zero (transparent medium).
    std::array<cd, 4> h{};
    std::array<cd, 4> l{};
    // min over ground eigenstates of |det(H_NH - E_l)| normalized by the
    // Hadamard bound; small values flag the elimination resonance.
    double resonance_margin = 1.0;
};

// Combined shifts on |u>: V^(up)(X_n) + sum_{m != n} V^(us)(X_m).
std::array<double, 2> dimer_u_shifts(const InteractionParams& inter, double r,
                                     const Vec3& x_alpha);

// The 4x4 non-Hermitian block in basis {e pi1, e pi2, u pi1, u pi2}
// (exposed for tests).
CMatrix non_hermitian_block_dimer(const EitParams& eit, const InteractionParams& inter,
                                  double r, const Vec3& x_alpha);

EffectiveAtomOperators effective_operators_dimer(const EitParams& eit,
                                                 const InteractionParams& inter, double r,
                                                 const Vec3& x_alpha);

// Margin below which effective_operators_dimer reports a near-resonance.
inline constexpr double kResonanceMarginFloor = 1e-10;

// Location of the spurious elimination resonance: scans r for the minimum
// normalized |det(H_NH - E_l)| in the far-background limit (V -> 0), which
// is where the bulk of a dilute gas sits.
double detect_resonance_radius(const EitParams& eit, const InteractionParams& inter,
                               double r_min, double r_max, double step);

}  // namespace dsim
