#include <doctest.h>

#include <cmath>

#include "dsim/core/config.hpp"
#include "dsim/core/rng.hpp"
#include "dsim/lindblad/full_model.hpp"

using namespace dsim;
using cd = std::complex<double>;

namespace {

FullModel single_atom_model(double d) {
    const Config cfg = Config::single_well_defaults();
    FullModel m;
    m.n_ryd = 1;
    m.ryd_positions = {{0, 0, 0}};
    m.bg_positions = {{d, 0, 0}};
    m.eit = cfg.eit();
    m.inter = cfg.interactions();
    return m;
}

}  // namespace

TEST_CASE("single background atom Hamiltonian block at Delta = 0") {
    FullModel m = single_atom_model(1.2);
    m.eit.delta_p = m.eit.delta_c = 0.0;
    const CMatrix h = m.hamiltonian();
    REQUIRE(h.dim() == 3);
    CHECK(h(1, 0) == cd(0.5 * m.eit.omega_p, 0));
    CHECK(h(2, 1) == cd(0.5 * m.eit.omega_c, 0));
    CHECK(h(0, 0) == cd(0, 0));
    CHECK(h(1, 1) == cd(0, 0));
    const double v = m.inter.c6_us / std::pow(1.2, 6);
    CHECK(h(2, 2).real() == doctest::Approx(v));
    CHECK(h.hermiticity_defect() < 1e-14);
}

TEST_CASE("C3 = 0 leaves the dimer Hamiltonian block diagonal") {
    Config cfg = Config::gamma_map_defaults();
    cfg.c3_dd_mhz_um3_over_2pi = 0.0;
    FullModel m;
    m.n_ryd = 2;
    m.ryd_positions = {{-3, 0, 0}, {3, 0, 0}};
    m.bg_positions = {{-3, 1.5, 0}};
    m.eit = cfg.eit();
    m.inter = cfg.interactions();
    const CMatrix h = m.hamiltonian();
    const int bdim = m.bg_dim();
    for (int a = 0; a < bdim; ++a)
        for (int b = 0; b < bdim; ++b) CHECK(std::abs(h(a, bdim + b)) == 0.0);
}

TEST_CASE("dimer with equidistant background atom: H_int symmetric under s<->p") {
    Config cfg = Config::gamma_map_defaults();
    cfg.c3_dd_mhz_um3_over_2pi = 500.0;
    FullModel m;
    m.n_ryd = 2;
    m.ryd_positions = {{-4, 0, 0}, {4, 0, 0}};
    m.bg_positions = {{0, 1.5, 0}};  // equidistant
    m.eit = cfg.eit();
    m.inter = cfg.interactions();
    const CMatrix h = m.hamiltonian();
    const int bdim = m.bg_dim();
    // |u> shifts for pi_1 and pi_2 coincide when d_1 = d_2.
    CHECK(h(0 * bdim + 2, 0 * bdim + 2) == h(1 * bdim + 2, 1 * bdim + 2));
}

TEST_CASE("pure decay: rho_ee = exp(-Gamma t), trace preserved") {
    FullModel m = single_atom_model(100.0);
    m.eit.omega_p = 1e-12;  // decouple the drive
    const double gamma = m.eit.gamma_p;
    CMatrix h(3);  // H = 0
    const auto ls = m.decay_ops();
    FullState st{CMatrix(3), 0.0};
    st.rho(1, 1) = 1.0;  // |e><e|

    EvolveOptions opts;
    opts.t_final = 0.2;
    opts.dt = 1e-4;
    opts.output_every = 0.05;
    std::vector<double> ts, pe;
    evolve_full(st, h, ls, opts, [&](const FullState& s) {
        ts.push_back(s.t);
        pe.push_back(s.rho(1, 1).real());
    });
    for (size_t i = 0; i < ts.size(); ++i)
        CHECK(pe[i] == doctest::Approx(std::exp(-gamma * ts[i])).epsilon(1e-6));
    CHECK(std::abs(st.rho.trace().real() - 1.0) < 1e-8);
}

TEST_CASE("probe off: background stays in g, dimer coherence constant") {
    Config cfg = Config::gamma_map_defaults();
    cfg.omega_p_mhz_over_2pi = 1e-14;
    cfg.c3_dd_mhz_um3_over_2pi = 500.0;
    FullModel m;
    m.n_ryd = 2;
    m.ryd_positions = {{-3, 0, 0}, {3, 0, 0}};
    m.bg_positions = {{-3, 1.5, 0}};
    m.eit = cfg.eit();
    m.inter = cfg.interactions();
    const CMatrix h = m.hamiltonian();
    const auto ls = m.decay_ops();
    const int bdim = m.bg_dim();
    FullState st{CMatrix(m.dim()), 0.0};
    st.rho(0, 0) = st.rho(bdim, bdim) = 0.5;
    st.rho(0, bdim) = st.rho(bdim, 0) = 0.5;  // (|pi1>+|pi2>)/sqrt(2), bg in g
    EvolveOptions opts;
    opts.t_final = 2.0;
    opts.output_every = 0.5;
    evolve_full(st, h, ls, opts, [](const FullState&) {});
    const CMatrix red = trace_out_background(st.rho, m);
    CHECK(std::abs(std::abs(red(0, 1)) - 0.5) < 1e-6);
}

TEST_CASE("EIT transparency: all shifts zero keeps dimer coherence constant") {
    Config cfg = Config::gamma_map_defaults();
    cfg.c6_us_mhz_um6_over_2pi = 0.0;
    cfg.c4_up_mhz_um4_over_2pi = 0.0;
    cfg.c3_dd_mhz_um3_over_2pi = 500.0;
    cfg.delta_p_mhz_over_2pi = cfg.delta_c_mhz_over_2pi = 0.0;
    FullModel m;
    m.n_ryd = 2;
    m.ryd_positions = {{-3, 0, 0}, {3, 0, 0}};
    m.bg_positions = {{-3, 1.5, 0}};
    m.eit = cfg.eit();
    m.inter = cfg.interactions();
    const int bdim = m.bg_dim();
    FullState st{CMatrix(m.dim()), 0.0};
    st.rho(0, 0) = st.rho(bdim, bdim) = 0.5;
    st.rho(0, bdim) = st.rho(bdim, 0) = 0.5;
    EvolveOptions opts;
    opts.t_final = 3.0;
    opts.output_every = 1.0;
    evolve_full(st, m.hamiltonian(), m.decay_ops(), opts, [](const FullState&) {});
    const CMatrix red = trace_out_background(st.rho, m);
    CHECK(std::abs(std::abs(red(0, 1)) - 0.5) < 1e-6);
}

TEST_CASE("superoperator linearity on random 6-dim states") {
    Config cfg = Config::gamma_map_defaults();
    cfg.c3_dd_mhz_um3_over_2pi = 933.0;
    FullModel m;
    m.n_ryd = 2;
    m.ryd_positions = {{-3, 0, 0}, {3, 0, 0}};
    m.bg_positions = {benchmark_bg_position(6.0, 1.6)};
    m.eit = cfg.eit();
    m.inter = cfg.interactions();
    const CMatrix h = m.hamiltonian();
    const auto ls = m.decay_ops();

    Xoshiro256pp rng(31);
    auto random_herm = [&](int d) {
        CMatrix r(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) r(i, j) = cd(rng.uniform(-1, 1), rng.uniform(-1, 1));
        CMatrix hmat(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) hmat(i, j) = 0.5 * (r(i, j) + std::conj(r(j, i)));
        return hmat;
    };
    const CMatrix r1 = random_herm(6), r2 = random_herm(6);

    EvolveOptions opts;
    opts.t_final = 0.01;
    opts.dt = 1e-5;
    opts.output_every = 1.0;
    auto evolve = [&](const CMatrix& rho0) {
        FullState st{rho0, 0.0};
        evolve_full(st, h, ls, opts, nullptr);
        return st.rho;
    };
    const double a = 0.3, b = 0.7;
    CMatrix combo = r1;
    combo *= a;
    CMatrix tmp = r2;
    tmp *= b;
    combo += tmp;
    CMatrix lhs = evolve(combo);
    CMatrix e1 = evolve(r1), e2 = evolve(r2);
    e1 *= a;
    e2 *= b;
    e1 += e2;
    lhs -= e1;
    CHECK(lhs.max_abs() < 1e-9);
}

TEST_CASE("steady-state susceptibility: transparency and blockade") {
    FullModel m = single_atom_model(100.0);  // far: no interaction shift
    m.eit.delta_p = m.eit.delta_c = 0.0;
    m.eit.omega_p = angular_from_mhz(0.05);

    // EIT dark state: chi ~ 0.
    const CMatrix rho_ss = steady_state(m.hamiltonian(), m.decay_ops());
    CHECK(susceptibility(rho_ss, m, 0) < 1e-4);

    // Deep in the blockade shell the medium responds like a bare two-level
    // atom; chi = (Gp/Op) Im rho_ge with the analytic two-level value.
    FullModel m2 = single_atom_model(0.45);
    m2.eit.delta_p = m2.eit.delta_c = 0.0;
    const CMatrix rho_b = steady_state(m2.hamiltonian(), m2.decay_ops());
    const double chi_b = susceptibility(rho_b, m2, 0);
    const double s = 2.0 * std::pow(m2.eit.omega_p / m2.eit.gamma_p, 2);
    const double chi_two_level = 1.0 / (1.0 + s);
    CHECK(chi_b == doctest::Approx(chi_two_level).epsilon(0.02));

    // Hermiticity and positivity of the steady state.
    CHECK(rho_b.hermiticity_defect() < 1e-10);
    const auto ev = hermitian_eigenvalues(rho_b);
    CHECK(ev.front() > -1e-8);
}

TEST_CASE("exponential fit recovers synthetic rates") {
    std::vector<double> t, c, c0;
    for (int i = 0; i < 200; ++i) {
        t.push_back(0.05 * i);
        c.push_back(0.5 * std::exp(-0.3 * 0.05 * i));
        c0.push_back(0.4);
    }
    const auto fit = fit_dephasing_rate(t, c);
    CHECK(fit.gamma == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-9));

    const auto flat = fit_dephasing_rate(t, c0);
    CHECK(std::abs(flat.gamma) < 1e-12);

    CHECK_THROWS(fit_dephasing_rate({0, 1}, {1, 1}));
    std::vector<double> bad = c;
    bad[5] = 1e-13;
    CHECK_THROWS(fit_dephasing_rate(t, bad));
}

TEST_CASE("positivity spot check along a benchmark evolution") {
    Config cfg = Config::gamma_map_defaults();
    FullModel m;
    m.n_ryd = 2;
    m.ryd_positions = {{-4.5, 0, 0}, {4.5, 0, 0}};
    m.bg_positions = {benchmark_bg_position(9.0, 1.6)};
    m.eit = cfg.eit();
    m.inter = cfg.interactions();
    const int bdim = m.bg_dim();
    FullState st{CMatrix(m.dim()), 0.0};
    st.rho(0, 0) = st.rho(bdim, bdim) = 0.5;
    st.rho(0, bdim) = st.rho(bdim, 0) = 0.5;
    EvolveOptions opts;
    opts.t_final = 1.0;
    opts.output_every = 0.1;
    int checks = 0;
    evolve_full(st, m.hamiltonian(), m.decay_ops(), opts, [&](const FullState& s) {
        const auto ev = hermitian_eigenvalues(s.rho);
        CHECK(ev.front() > -1e-8);
        CHECK(s.rho.hermiticity_defect() < 1e-10);
        ++checks;
    });
    CHECK(checks >= 10);
}
