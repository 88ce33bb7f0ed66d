#include <doctest.h>

#include <cmath>

#include "dsim/core/config.hpp"
#include "dsim/core/rng.hpp"
#include "dsim/effective/ops.hpp"

using namespace dsim;
using cd = std::complex<double>;

namespace {
EitParams random_eit(Xoshiro256pp& rng) {
    EitParams e;
    e.omega_p = rng.uniform(0.05, 20.0);
    e.omega_c = rng.uniform(5.0, 200.0);
    e.gamma_p = rng.uniform(1.0, 50.0);
    e.delta_p = rng.uniform(-300.0, 300.0);
    e.delta_c = rng.uniform(-300.0, 300.0);
    return e;
}
}  // namespace

// The pre-build oracle: the generic elimination machinery must reproduce
// the closed forms to 1e-10 relative on random configurations.
TEST_CASE("closed form vs generic non-Hermitian solve, N = 1") {
    Xoshiro256pp rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const EitParams eit = random_eit(rng);
        const double v = rng.uniform(-5e4, 5e4);
        const auto cf = closed_form_single(eit, v);
        const auto gen = effective_single_generic(eit, v);
        const double hscale = std::max(std::abs(cf.h), 1e-300);
        const double lscale = std::max(std::abs(cf.l), 1e-300);
        CHECK(std::abs(cf.h - gen.h) / hscale < 1e-10);
        CHECK(std::abs(cf.l - gen.l) / lscale < 1e-10);
    }
}

TEST_CASE("transparent medium: Vtilde = 0 gives vanishing operators") {
    EitParams eit;
    eit.omega_p = 1.0;
    eit.omega_c = 50.0;
    eit.gamma_p = 10.0;
    const auto out = closed_form_single(eit, 0.0);
    CHECK(out.h == 0.0);
    CHECK(out.l == cd{});
}

TEST_CASE("|l|^2 saturates monotonically in |Vtilde|") {
    EitParams eit;
    eit.omega_p = angular_from_mhz(0.05);
    eit.omega_c = angular_from_mhz(5.0);
    eit.gamma_p = angular_from_mhz(6.1);
    const double sat = eit.omega_p * eit.omega_p / eit.gamma_p;
    double prev = 0.0;
    for (double v = 1.0; v < 1e7; v *= 2.0) {
        const double l2 = std::norm(closed_form_single(eit, v).l);
        CHECK(l2 >= prev);
        prev = l2;
    }
    CHECK(prev == doctest::Approx(sat).epsilon(1e-3));

    // At the critical distance V = Omega_c^2/Gamma_p the dephasing rate sits
    // at 4/5 of saturation: the 50% crossover lies within a factor 2 of d_c.
    const double v_dc = eit.omega_c * eit.omega_c / eit.gamma_p;
    const double frac = std::norm(closed_form_single(eit, v_dc).l) / sat;
    CHECK(frac == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(frac > 0.25);
    CHECK(frac < 1.0);
}

TEST_CASE("4x4 non-Hermitian block is the direct transcription") {
    const Config cfg = Config::gamma_map_defaults();
    EitParams eit = cfg.eit();
    InteractionParams inter = cfg.interactions();
    inter.c3_dd = angular_from_mhz(900.0);
    const double r = 9.0;
    const Vec3 atom{-0.5 * r, 1.5, 0.0};
    const CMatrix m = non_hermitian_block_dimer(eit, inter, r, atom);

    const double w = inter.c3_dd / (r * r * r);
    const auto us = dimer_u_shifts(inter, r, atom);
    CHECK(m(0, 0) == cd(-eit.delta_p, -0.5 * eit.gamma_p));
    CHECK(m(0, 1) == cd(w, 0));
    CHECK(m(0, 2) == cd(0.5 * eit.omega_c, 0));
    CHECK(m(0, 3) == cd(0, 0));
    CHECK(m(2, 2).real() == doctest::Approx(us[0] - eit.delta_p - eit.delta_c));
    CHECK(m(3, 3).real() == doctest::Approx(us[1] - eit.delta_p - eit.delta_c));
    CHECK(m(2, 3) == cd(w, 0));

    // u shifts: pi_1 puts atom 1 (at -r/2) in p: C4/d1^4 + C6/d2^6.
    const double d1 = 1.5, d2 = std::sqrt(r * r + 1.5 * 1.5);
    CHECK(us[0] == doctest::Approx(inter.c4_up / std::pow(d1, 4) +
                                   inter.c6_us / std::pow(d2, 6)));
}

TEST_CASE("C3 = 0 block-decouples the dimer into two single-atom problems") {
    const Config cfg = Config::gamma_map_defaults();
    const EitParams eit = cfg.eit();
    InteractionParams inter = cfg.interactions();
    inter.c3_dd = 0.0;
    const double r = 10.0;
    const Vec3 atom{-0.5 * r, 1.6, 0.0};
    const auto eff = effective_operators_dimer(eit, inter, r, atom);

    CHECK(std::abs(eff.l[1]) < 1e-14);
    CHECK(std::abs(eff.l[2]) < 1e-14);
    CHECK(std::abs(eff.h[1]) < 1e-14);

    const auto us = dimer_u_shifts(inter, r, atom);
    for (int n = 0; n < 2; ++n) {
        const auto single = closed_form_single(eit, us[n]);
        const int c = n * 2 + n;
        CHECK(std::abs(eff.h[c].real() - single.h) <
              1e-10 * std::max(std::abs(single.h), 1e-12));
        CHECK(std::abs(eff.l[c] - single.l) < 1e-10 * std::max(std::abs(single.l), 1e-12));
    }
}

TEST_CASE("dimer operators: Hermiticity, transparency limit, perturbative limit") {
    const Config cfg = Config::gamma_map_defaults();
    const EitParams eit = cfg.eit();
    InteractionParams inter = cfg.interactions();
    inter.c3_dd = angular_from_mhz(933.0);

    SUBCASE("h exactly Hermitian, l -> 0 for a distant atom") {
        const auto eff = effective_operators_dimer(eit, inter, 9.0, {0.0, 1.7, 0.0});
        CHECK(eff.h[1] == std::conj(eff.h[2]));
        CHECK(eff.h[0].imag() == 0.0);

        const auto far = effective_operators_dimer(eit, inter, 9.0, {0.0, 500.0, 0.0});
        const auto farther = effective_operators_dimer(eit, inter, 9.0, {0.0, 5000.0, 0.0});
        for (int c = 0; c < 4; ++c) {
            CHECK(std::abs(far.l[c]) < 1e-7);
            CHECK(std::abs(far.h[c]) < 1e-7);
            CHECK(std::abs(farther.l[c]) <= std::abs(far.l[c]));
        }
    }

    SUBCASE("W << Gamma_p matches the W-ignored elimination to first order") {
        InteractionParams weak = inter;
        weak.c3_dd = 0.005 * eit.gamma_p * 1000.0;  // W(10) = 5e-3 Gamma_p
        const double r = 10.0;
        const Vec3 atom{-0.5 * r, 1.6, 0.0};
        const auto eff = effective_operators_dimer(eit, weak, r, atom);
        const auto us = dimer_u_shifts(weak, r, atom);
        for (int n = 0; n < 2; ++n) {
            const auto single = closed_form_single(eit, us[n]);
            const int c = n * 2 + n;
            CHECK(std::abs(eff.l[c] - single.l) / std::abs(single.l) < 0.1);
        }
    }
}

TEST_CASE("elimination resonance: located, margin dips, smooth elsewhere") {
    const Config cfg = Config::gamma_map_defaults();
    const EitParams eit = cfg.eit();
    InteractionParams inter = cfg.interactions();
    inter.c3_dd = angular_from_mhz(933.0);

    const double r_res = detect_resonance_radius(eit, inter, 2.0, 15.0, 0.005);
    CHECK(r_res > 2.5);
    CHECK(r_res < 9.0);

    // 2W(r_res) should sit near Omega_c/2 (the dressed crossing).
    const double w_res = inter.c3_dd / (r_res * r_res * r_res);
    CHECK(2.0 * w_res == doctest::Approx(0.5 * eit.omega_c).epsilon(0.25));

    const Vec3 atom{0.0, 40.0, 0.0};  // weakly coupled background atom
    const double m_at = effective_operators_dimer(eit, inter, r_res, atom).resonance_margin;
    const double m_off =
        effective_operators_dimer(eit, inter, r_res + 1.5, atom).resonance_margin;
    CHECK(m_at < 0.3 * m_off);

    // Continuity scan away from the flagged window: no jump exceeds 10x the
    // local step scale (max over the trailing window).
    const Vec3 shell_atom{-4.0, 1.6, 0.0};
    std::vector<double> vals;
    std::vector<bool> gap;
    for (double r = 2.0; r <= 20.0; r += 0.01) {
        if (r > r_res - 0.6 && r < r_res + 0.6) continue;
        gap.push_back(!vals.empty() && r - 0.011 > 2.0 && r > r_res - 0.7 && r < r_res + 1.7);
        vals.push_back(std::abs(effective_operators_dimer(eit, inter, r, shell_atom).l[0]));
    }
    double scale = 0;
    for (double v : vals) scale = std::max(scale, v);
    std::vector<double> steps;
    for (size_t i = 1; i < vals.size(); ++i) {
        if (gap[i]) { steps.clear(); continue; }
        const double step = std::abs(vals[i] - vals[i - 1]);
        if (steps.size() >= 5) {
            double local = 0;
            for (size_t k = steps.size() - 5; k < steps.size(); ++k)
                local = std::max(local, steps[k]);
            CHECK(step < 10.0 * local + 1e-6 * scale);
        }
        steps.push_back(step);
    }
}
