#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "dsim/core/gas.hpp"
#include "dsim/core/grid.hpp"
#include "dsim/core/params.hpp"

// Grid-sampled dephasing and disorder kernels, assembled once by summing
// effective-operator contributions over the background gas and cached to
// disk; propagation never re-evaluates effective operators.

namespace dsim {

using cd = std::complex<double>;

// Single-particle kernels on (x,x'):
//   gamma(x,x') = sum_a |l_a(x)|^2 + |l_a(x')|^2 - 2 Re[l_a(x) l_a*(x')]
//   dep(x,x')   = h~(x) - h~(x')          (h~ = h_eff + V_ext)
//   depp(x,x')  = sum_a Im[l_a(x) l_a*(x')]
// gamma(x,x) is exactly zero by construction (the diagonal of the
// cross-correlation slab is reused for the |l|^2 sums).
struct KernelSet1 {
    Grid1D grid;
    std::vector<double> gamma, dep, depp;  // n*n row-major, i = x, j = x'
    std::vector<double> h_eff;             // per grid point, before compensation
    std::vector<double> v_ext;             // applied compensation (zeros if off)

    size_t at(int i, int j) const { return static_cast<size_t>(i) * grid.n + j; }
};

KernelSet1 build_kernels_single(const BackgroundGas& gas, const Grid1D& grid,
                                const EitParams& eit, const InteractionParams& inter,
                                const std::vector<double>* v_ext = nullptr);

// Even-polynomial compensation potential V_ext = a + b x^2 + c x^4 + d x^6
// + e x^8, least-squares fitted to -h_eff.
struct ExternalPotential {
    std::array<double, 5> coeff{};  // a, b, c, d, e (rad/us per um^2k)
    double rms_residual = 0.0;

    double operator()(double x) const {
        const double x2 = x * x;
        return coeff[0] + x2 * (coeff[1] + x2 * (coeff[2] + x2 * (coeff[3] + x2 * coeff[4])));
    }
};

ExternalPotential fit_vext(const std::vector<double>& x, const std::vector<double>& h_eff);

// Dimer kernel assembly options.
struct DimerKernelFlags {
    bool neglect_delta_e = false;      // drop every Delta E contribution
    bool dominant_gamma_only = false;  // keep only gamma with (nm) == (kl)
    bool no_state_transfer = false;    // zero off-diagonal l entries (pure dephasing)
    double gamma_cap = 0.0;            // rad/us; 0 = off. Caps the local measurement
                                       // rate by uniformly rescaling l at that r,
                                       // which keeps the Lindblad structure exact.
    double mask_lo = -1.0, mask_hi = -1.0;  // resonance window; -1 = auto-detect
    bool operator==(const DimerKernelFlags&) const = default;
};

// Dimer kernels: 16 combined complex slabs K^{nm}_{kl}(r,r') such that the
// non-kinetic, non-W part of the equation of motion is
//   drho_nm/dt += sum_kl K^{nm}_{kl}(r,r') rho_kl(r,r'),
// i.e. K = (i Delta E - gamma) with the dissipator and the effective-shift
// commutator folded in. Stored complex<float>; assembly runs in double and
// the conjugation symmetry K^{nm}_{kl}(r,r') = [K^{mn}_{lk}(r',r)]* is exact.
struct KernelSet2 {
    Grid1D grid;
    std::array<std::vector<std::complex<float>>, 16> slabs;  // index (n*2+m)*4 + k*2+l
    std::vector<double> gdiag12;  // uncapped gamma(r,r)^{12}_{12} (R_c diagnostic)
    std::vector<double> gdiag11;  // uncapped gamma(r,r)^{11}_{11}
    std::array<std::vector<cd>, 4> h_sum;  // sum_a h^{ab}(r)
    std::vector<double> cap_scale;         // applied l rescale per r (1 = none)
    double lambda_kernel = 0.0;            // max local rate, for step control
    double mask_lo = 0.0, mask_hi = 0.0;   // resolved window (0,0 = off)
    DimerKernelFlags flags;

    // Double-precision dissipator tensor O = K - i*(shift part), kept on
    // small grids for invariant tests.
    std::array<std::vector<cd>, 16> o_tensor;
    bool has_o_tensor = false;

    size_t at(int i, int j) const { return static_cast<size_t>(i) * grid.n + j; }
    static int slab_index(int n, int m, int k, int l) { return (n * 2 + m) * 4 + k * 2 + l; }
};

KernelSet2 build_kernels_dimer(const BackgroundGas& gas, const Grid1D& grid,
                               const EitParams& eit, const InteractionParams& inter,
                               const DimerKernelFlags& flags);

// Diagonal gamma(r,r)^{12}_{12} profile only; the cheap path for R_c
// detection and C3 calibration.
std::vector<double> gamma_diag12_profile(const BackgroundGas& gas,
                                         const std::vector<double>& r_values,
                                         const EitParams& eit, const InteractionParams& inter,
                                         double mask_lo, double mask_hi);

// R_c: largest r below the gamma(r,r)^{12}_{12} peak where the profile
// falls under threshold * peak.
double detect_rc(const std::vector<double>& r_values, const std::vector<double>& gdiag12,
                 double threshold = 0.1);
double detect_rc(const KernelSet2& ks, double threshold = 0.1);

// Binary container + JSON sidecar.
void save_kernels(const KernelSet2& ks, const std::string& path, const std::string& meta_json);
KernelSet2 load_kernels(const std::string& path);
void save_kernels_single(const KernelSet1& ks, const std::string& path,
                         const std::string& meta_json);
KernelSet1 load_kernels_single(const std::string& path);

}  // namespace dsim
