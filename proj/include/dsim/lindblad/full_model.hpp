#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dsim/core/gas.hpp"
#include "dsim/core/params.hpp"
#include "dsim/lin/cmatrix.hpp"

// Exact dense integration of the few-body master equation: one or two
// Rydberg atoms plus up to four 3-level background atoms {g,e,u}. This is
// the benchmark oracle for the effective model, not a production path.

namespace dsim {

struct FullModel {
    // basis: |dimer state n> (x) |b_1 ... b_Nbg>, b in {g=0,e=1,u=2};
    // index = n * 3^Nbg + sum_a b_a 3^(Nbg-1-a).
    int n_ryd = 1;
    std::vector<Vec3> ryd_positions;
    std::vector<Vec3> bg_positions;
    EitParams eit;
    InteractionParams inter;

    int dimer_dim() const { return n_ryd == 2 ? 2 : 1; }
    int bg_dim() const;
    int dim() const { return dimer_dim() * bg_dim(); }

    CMatrix hamiltonian() const;
    std::vector<CMatrix> decay_ops() const;  // sqrt(Gamma_p)|g><e| per atom

    // Composite basis states.
    int index(int n, const std::vector<int>& bg_levels) const;
};

struct FullState {
    CMatrix rho;
    double t = 0.0;
};

struct EvolveOptions {
    double t_final = 10.0;
    double dt = 0.0;           // 0 -> dt_factor / spectral estimate
    double dt_factor = 0.1;    // dt = dt_factor / max(|H| estimate, Gamma_p)
    double output_every = 0.1;
    double trace_tol = 1e-6;   // per-us drift triggering a step-size error
};

// RK4 integration of rho' = -i[H,rho] + sum_a D[L_a]. The callback fires at
// t=0 and every output_every; throws with a suggested dt when the trace
// drifts beyond trace_tol per us.
void evolve_full(FullState& state, const CMatrix& h, const std::vector<CMatrix>& ls,
                 const EvolveOptions& opts,
                 const std::function<void(const FullState&)>& on_output);

// Spectral scale estimate used for the default step: max row abs sum of H
// plus Gamma_p.
double spectral_estimate(const CMatrix& h, double gamma_p);

// Partial traces.
CMatrix trace_out_background(const CMatrix& rho, const FullModel& m);
CMatrix trace_to_background_atom(const CMatrix& rho, const FullModel& m, int alpha);

// chi = (Gamma_p/Omega_p) Im <g| rho_alpha |e>.
double susceptibility(const CMatrix& rho, const FullModel& m, int alpha);

// Null-space steady state of the Lindbladian (test oracle).
CMatrix steady_state(const CMatrix& h, const std::vector<CMatrix>& ls);

struct DephasingFit {
    double gamma = 0.0;
    double r2 = 0.0;
    std::string warning;  // non-empty when the series is not cleanly exponential
};

// Log-linear least squares of |coherence| = A exp(-gamma t). Window: the
// first head_discard fraction of samples is dropped (background settling
// transient), the fit stops once |c| < floor_abs.
DephasingFit fit_dephasing_rate(const std::vector<double>& t, const std::vector<double>& c,
                                double head_discard = 0.05, double floor_abs = 1e-3);

struct GammaMapOptions {
    double t_final = 10.0;
    double sample_every = 0.02;
    double dt_factor = 0.5;  // per-cell dt = dt_factor / spectral estimate
};

struct GammaMapResult {
    std::vector<double> r, d;
    std::vector<double> gamma;  // row-major [r][d]
    std::vector<double> r2;
};

// One exponential fit per (r,d) cell of the full model; dimer initialized in
// (|pi1> + |pi2>)/sqrt(2) (x) |g>, motion neglected. Deterministic
// parallel-for over cells.
GammaMapResult gamma_map_full(const std::vector<double>& r_list,
                              const std::vector<double>& d_list, const EitParams& eit,
                              const InteractionParams& inter, const GammaMapOptions& opts);

// Same map through the effective model (2x2 master equation per cell).
GammaMapResult gamma_map_effective(const std::vector<double>& r_list,
                                   const std::vector<double>& d_list, const EitParams& eit,
                                   const InteractionParams& inter,
                                   const GammaMapOptions& opts);

// Background atom placement for the (r,d) benchmark: perpendicular offset d
// from the dimer atom at x = -r/2 (the pi_1 p-state site).
Vec3 benchmark_bg_position(double r, double d);

}  // namespace dsim
