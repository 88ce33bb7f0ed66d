#include "dsim/effective/ops.hpp"

#include <cmath>
#include <stdexcept>

namespace dsim {

namespace {

double pow6(double x) { const double x2 = x * x; return x2 * x2 * x2; }
double pow4(double x) { const double x2 = x * x; return x2 * x2; }
double pow3(double x) { return x * x * x; }

// 4x4 complex linear solve, allocation-free (hot path of kernel assembly).
struct Mat4 {
    std::array<cd, 16> a{};
    cd& at(int i, int j) { return a[i * 4 + j]; }
    cd at(int i, int j) const { return a[i * 4 + j]; }
};

// Partial-pivot LU solve of M x = b; returns |det M|.
double solve4(Mat4 m, std::array<cd, 4>& b) {
    double absdet = 1.0;
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        double best = std::abs(m.at(c, c));
        for (int r = c + 1; r < 4; ++r)
            if (std::abs(m.at(r, c)) > best) { best = std::abs(m.at(r, c)); piv = r; }
        if (piv != c) {
            for (int j = 0; j < 4; ++j) std::swap(m.at(c, j), m.at(piv, j));
            std::swap(b[c], b[piv]);
        }
        if (best == 0.0) return 0.0;
        absdet *= best;
        const cd inv = 1.0 / m.at(c, c);
        for (int r = c + 1; r < 4; ++r) {
            const cd f = m.at(r, c) * inv;
            if (f == cd{}) continue;
            m.at(r, c) = f;
            for (int j = c + 1; j < 4; ++j) m.at(r, j) -= f * m.at(c, j);
            b[r] -= f * b[c];
        }
    }
    for (int i = 3; i >= 0; --i) {
        for (int j = i + 1; j < 4; ++j) b[i] -= m.at(i, j) * b[j];
        b[i] /= m.at(i, i);
    }
    return absdet;
}

// Hadamard bound of a 4x4, for a dimensionless singularity margin.
double hadamard_bound(const Mat4& m) {
    double prod = 1.0;
    for (int i = 0; i < 4; ++i) {
        double s = 0;
        for (int j = 0; j < 4; ++j) s += std::norm(m.at(i, j));
        prod *= std::sqrt(s);
    }
    return prod;
}

Mat4 hnh_dimer(const EitParams& eit, double w, const std::array<double, 2>& utilde) {
    Mat4 m;
    const cd e_diag(-eit.delta_p, -0.5 * eit.gamma_p);
    const double oc2 = 0.5 * eit.omega_c;
    m.at(0, 0) = e_diag;
    m.at(1, 1) = e_diag;
    m.at(0, 1) = w;
    m.at(1, 0) = w;
    m.at(2, 2) = utilde[0];
    m.at(3, 3) = utilde[1];
    m.at(2, 3) = w;
    m.at(3, 2) = w;
    m.at(0, 2) = oc2;
    m.at(2, 0) = oc2;
    m.at(1, 3) = oc2;
    m.at(3, 1) = oc2;
    return m;
}

}  // namespace

SingleAtomEff closed_form_single(const EitParams& eit, double v_us) {
    const double vt = v_us - eit.delta_p - eit.delta_c;
    if (vt == 0.0) return {};  // both numerators carry a factor Vtilde
    const double oc2 = eit.omega_c * eit.omega_c;
    const double oct2 = oc2 + 4.0 * vt * eit.delta_p;            // Omega_c-tilde squared
    const cd gpt(eit.gamma_p, -2.0 * eit.delta_p);               // Gamma_p-tilde
    const double gpt_term = std::norm(gpt) - 4.0 * eit.delta_p * eit.delta_p;
    const double denom_h = oct2 * oct2 + 4.0 * vt * vt * gpt_term;
    const cd denom_l = 2.0 * vt * gpt - cd(0.0, oc2);
    if (denom_h == 0.0 || denom_l == cd{})
        throw std::domain_error("closed_form_single: vanishing denominator (near resonance)");
    SingleAtomEff out;
    out.h = eit.omega_p * eit.omega_p * oct2 * vt / denom_h;
    out.l = cd(0.0, 2.0 * vt) * std::sqrt(eit.gamma_p) * eit.omega_p / denom_l;
    return out;
}

SingleAtomEff effective_single_generic(const EitParams& eit, double v_us) {
    // Basis {e, u}; single ground state at E = 0.
    const cd a(-eit.delta_p, -0.5 * eit.gamma_p);
    const double b = 0.5 * eit.omega_c;
    const double vt = v_us - eit.delta_p - eit.delta_c;
    // (H_NH)^-1 applied to |e>: w = (H_NH)^-1 (1,0)^T
    const cd det = a * vt - b * b;
    if (det == cd{}) throw std::domain_error("effective_single_generic: singular H_NH");
    const cd we = vt / det;
    SingleAtomEff out;
    const cd x = 0.25 * eit.omega_p * eit.omega_p * we;
    out.h = -x.real();  // -(X + X^dagger)/2 for scalar X
    out.l = 0.5 * std::sqrt(eit.gamma_p) * eit.omega_p * we;
    return out;
}

SingleAtomEff closed_form_single_at(const EitParams& eit, const InteractionParams& inter,
                                    double x, const Vec3& x_alpha) {
    const double d = distance(Vec3{x, 0, 0}, x_alpha);
    if (!(d > 0.0)) throw std::domain_error("closed_form_single_at: coincident positions");
    return closed_form_single(eit, inter.c6_us / pow6(d));
}

std::array<double, 2> dimer_u_shifts(const InteractionParams& inter, double r,
                                     const Vec3& x_alpha) {
    const Vec3 x1{-0.5 * r, 0, 0}, x2{0.5 * r, 0, 0};
    const double d1 = distance(x1, x_alpha), d2 = distance(x2, x_alpha);
    if (!(d1 > 0.0) || !(d2 > 0.0))
        throw std::domain_error("dimer_u_shifts: background atom coincides with a Rydberg atom");
    // pi_1 = |ps>: atom 1 in p, atom 2 in s; pi_2 the exchange.
    return {inter.c4_up / pow4(d1) + inter.c6_us / pow6(d2),
            inter.c4_up / pow4(d2) + inter.c6_us / pow6(d1)};
}

CMatrix non_hermitian_block_dimer(const EitParams& eit, const InteractionParams& inter,
                                  double r, const Vec3& x_alpha) {
    const double w = inter.c3_dd / pow3(r);
    auto us = dimer_u_shifts(inter, r, x_alpha);
    us[0] -= eit.delta_p + eit.delta_c;
    us[1] -= eit.delta_p + eit.delta_c;
    const Mat4 m = hnh_dimer(eit, w, us);
    CMatrix out(4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out(i, j) = m.at(i, j);
    return out;
}

EffectiveAtomOperators effective_operators_dimer(const EitParams& eit,
                                                 const InteractionParams& inter, double r,
                                                 const Vec3& x_alpha) {
    const double w = inter.c3_dd / pow3(r);
    auto us = dimer_u_shifts(inter, r, x_alpha);
    us[0] -= eit.delta_p + eit.delta_c;
    us[1] -= eit.delta_p + eit.delta_c;
    const Mat4 base = hnh_dimer(eit, w, us);
    const double hb = hadamard_bound(base);

    // Ground eigenbasis of H_g = W sigma_x: E = +/- W, phi = (1, +/-1)/sqrt(2).
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const std::array<double, 2> energies{w, -w};
    const std::array<std::array<double, 2>, 2> phi{{{inv_sqrt2, inv_sqrt2},
                                                    {inv_sqrt2, -inv_sqrt2}}};

    EffectiveAtomOperators out;
    std::array<cd, 4> x{};  // X = (Op^2/4) sum_l w_l^e phi_l^T on {pi_n}
    std::array<cd, 4> lmat{};
    for (int l = 0; l < 2; ++l) {
        Mat4 m = base;
        for (int i = 0; i < 4; ++i) m.at(i, i) -= energies[l];
        std::array<cd, 4> rhs{phi[l][0], phi[l][1], 0.0, 0.0};
        const double absdet = solve4(m, rhs);
        const double margin = hb > 0 ? absdet / hb : 0.0;
        out.resonance_margin = std::min(out.resonance_margin, margin);
        if (margin < kResonanceMarginFloor)
            throw std::domain_error(
                "effective_operators_dimer: (H_NH - E_l) near singular at E_l = " +
                std::to_string(energies[l]) + " (elimination resonance), r = " +
                std::to_string(r));
        for (int n = 0; n < 2; ++n)
            for (int mcol = 0; mcol < 2; ++mcol) {
                x[n * 2 + mcol] += rhs[n] * phi[l][mcol];
                lmat[n * 2 + mcol] += rhs[n] * phi[l][mcol];
            }
    }
    const double op = eit.omega_p;
    const double cx = 0.25 * op * op;
    const double cl = 0.5 * op * std::sqrt(eit.gamma_p);
    for (auto& v : x) v *= cx;
    for (auto& v : lmat) v *= cl;

    // h = -(X + X^dagger)/2, stored exactly Hermitian.
    out.h[0] = -x[0].real();
    out.h[3] = -x[3].real();
    out.h[1] = -0.5 * (x[1] + std::conj(x[2]));
    out.h[2] = std::conj(out.h[1]);
    out.l = lmat;
    return out;
}

double detect_resonance_radius(const EitParams& eit, const InteractionParams& inter,
                               double r_min, double r_max, double step) {
    double best_r = r_min, best_margin = 1e300;
    for (double r = r_min; r <= r_max; r += step) {
        const double w = inter.c3_dd / pow3(r);
        const Mat4 base = hnh_dimer(eit, w, {0.0, 0.0});  // far-background limit
        const double hb = hadamard_bound(base);
        for (double e : {w, -w}) {
            Mat4 m = base;
            for (int i = 0; i < 4; ++i) m.at(i, i) -= e;
            std::array<cd, 4> rhs{1.0, 0.0, 0.0, 0.0};
            const double margin = solve4(m, rhs) / hb;
            if (margin < best_margin) {
                best_margin = margin;
                best_r = r;
            }
        }
    }
    return best_r;
}

}  // namespace dsim
