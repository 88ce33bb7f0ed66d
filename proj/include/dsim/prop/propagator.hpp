#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dsim/core/grid.hpp"
#include "dsim/maps/kernels.hpp"

// Time evolution of motional density matrices: RK4 with the kinetic term
// applied spectrally (double FFT) and the kernels elementwise. A step is a
// pipeline of data-parallel passes; steps are strictly sequential.

namespace dsim {

// cos^2 absorber ramps: 1 on [lo_end, hi_start], falling to 0 at the grid
// edges. Pass grid.min/grid.max to disable a side.
std::vector<double> make_edge_mask(const Grid1D& grid, double lo_end, double hi_start);

// Elementwise mask in x and x'. Returns the absorbed norm (trace loss).
double absorbing_boundary(std::vector<std::complex<double>>& rho, const Grid1D& grid,
                          const std::vector<double>& mask);

struct StepControl {
    double dt = 0.0;          // 0 -> safety * 2.828 / lambda_total
    double dt_safety = 0.2;
    int check_every = 100;    // Hermiticity / NaN cadence
    int filter_every = 0;     // 0 = no spectral filter
    double filter_frac = 0.9; // filter ramp start as fraction of k_max
};

struct Observation1 {
    double t = 0, trace = 1, peak_density = 0, width = 0, mean_x = 0;
    double kinetic_energy = 0, herm_defect = 0, absorbed = 0;
};

class SinglePropagator {
  public:
    SinglePropagator(const Grid1D& grid, double hbar_over_mass, const KernelSet1* kernels,
                     std::vector<double> mask, const StepControl& ctl);

    void set_gaussian(double center, double sigma);
    void set_state(std::vector<std::complex<double>> rho, double t = 0.0);

    double dt() const { return dt_; }
    double t() const { return t_; }
    const std::vector<std::complex<double>>& rho() const { return rho_; }

    // Runs to t_final, invoking on_output at t = 0 and every output_every.
    void run(double t_final, double output_every,
             const std::function<void(const Observation1&)>& on_output);

    Observation1 observe() const;

  private:
    void rhs(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out);
    void step(double dt);

    Grid1D grid_;
    double hbar_over_mass_;
    const KernelSet1* kernels_;
    std::vector<double> mask_;
    StepControl ctl_;
    double dt_ = 0, t_ = 0, absorbed_ = 0;
    long long istep_ = 0;
    std::vector<double> k2_;
    std::vector<std::complex<double>> rho_, work_, k_, stage_, acc_;
};

// Dimer: four components rho_nm on (r,r'), component index c = n*2+m.
struct SurfaceDensities {
    std::vector<double> n_rep, n_att;  // diagonal (primary) form, real
    double p_rep = 0, p_att = 0;
    // Literal integral-over-r' form and its largest imaginary part, reported
    // for comparison with the diagonal form.
    std::vector<double> n_rep_integral;
    double max_imag_integral = 0;
};

struct Observation2 {
    double t = 0, trace = 1, p_rep = 0, p_att = 0;
    double absorbed_rep = 0, absorbed_att = 0, absorbed_filter = 0;
    double peak_n_rep = 0, mean_r_rep = 0;
    double herm_defect = 0;
};

struct DimerMasks {
    std::vector<double> rep, att;  // per grid point, 1 = keep
};

class DimerPropagator {
  public:
    DimerPropagator(const KernelSet2& kernels, double hbar_over_mass, double c3,
                    double w_cap_radius, DimerMasks masks, const StepControl& ctl);

    // Gaussian packet on the chosen electronic surface.
    void set_gaussian(double center, double sigma, DimerSurface surface);

    double dt() const { return dt_; }
    double t() const { return t_; }
    const std::array<std::vector<std::complex<double>>, 4>& rho() const { return rho_; }
    const Grid1D& grid() const { return grid_; }

    void run(double t_final, double output_every,
             const std::function<void(const Observation2&, const SurfaceDensities&)>& on_output);

    Observation2 observe() const;
    SurfaceDensities surface_densities() const;

  private:
    void rhs(const std::array<std::vector<std::complex<double>>, 4>& in,
             std::array<std::vector<std::complex<double>>, 4>& out);
    void step(double dt);
    void apply_masks();
    void apply_filter();

    Grid1D grid_;
    const KernelSet2& kernels_;
    double hbar_over_mass_;  // hbar/M; the relative-coordinate factor hbar/2mu equals it
    std::vector<double> w_;  // C3/r^3, capped below w_cap_radius
    DimerMasks masks_;
    StepControl ctl_;
    double dt_ = 0, t_ = 0;
    double absorbed_rep_ = 0, absorbed_att_ = 0, absorbed_filter_ = 0;
    long long istep_ = 0;
    std::vector<double> k2_, filter_;
    std::array<std::vector<std::complex<double>>, 4> rho_, k_, stage_, acc_;
    std::vector<std::complex<double>> work_;
};

// Operational reflection probability: at the inner turning point of the
// reflected packet (first inward-to-outward sign change of d<r>_rep/dt after
// the wall encounter; t_final fallback), integrate n_rep over r < r_boundary.
struct ReflectionResult {
    double probability = 0;
    double analysis_time = 0;
    double r_boundary = 0;
};
ReflectionResult reflection_probability(const std::vector<double>& times,
                                        const std::vector<std::vector<double>>& n_rep_profiles,
                                        const Grid1D& grid, double r_boundary);

}  // namespace dsim
