#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "dsim/core/gas.hpp"
#include "dsim/core/grid.hpp"
#include "dsim/core/params.hpp"
#include "dsim/core/units.hpp"

// Sectioned key/value configuration with explicit units in key names; the
// paper mixes /2pi and angular conventions, the key names keep that
// conversion at the parse boundary. parse(serialize(c)) == c exactly.

namespace dsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    // [scenario]
    std::string scenario = "single-well";

    // [units]
    double hbar_over_mass_um2_per_us = kHbarOverMassRb87;

    // [eit] (/2pi MHz)
    double omega_p_mhz_over_2pi = 0.05;
    double omega_c_mhz_over_2pi = 5.0;
    double delta_p_mhz_over_2pi = 50.0;
    double delta_c_mhz_over_2pi = -50.0;
    double gamma_p_mhz_over_2pi = 6.1;

    // [interactions] (/2pi MHz um^eta)
    double c6_us_mhz_um6_over_2pi = -88.0;
    double c4_up_mhz_um4_over_2pi = 0.0;
    double c3_dd_mhz_um3_over_2pi = 0.0;

    // [gas]
    double gas_center_x_um = 0.0, gas_center_y_um = 0.0, gas_center_z_um = 0.0;
    double gas_extent_x_um = 1.5, gas_extent_y_um = 1.5, gas_extent_z_um = 1.5;
    double gas_density_per_m3 = 2.963e21;
    uint64_t gas_seed = 71;

    // [grid]
    double grid_min_um = -6.0, grid_max_um = 6.0;
    int grid_n = 256;

    // [wavepacket]
    double wp_center_um = 0.0;
    double wp_sigma_um = 0.4;
    std::string wp_surface = "repulsive";

    // [propagation]
    double t_final_us = 500.0;
    double dt_us = 0.0;  // 0 = from the stability bound
    double dt_safety = 0.2;
    double output_every_us = 10.0;
    int check_every = 100;
    int kfilter_every = 0;  // 0 = off
    double kfilter_frac = 0.9;

    // [masks] (absolute positions of the absorber ramp ends; single-particle
    // runs use the symmetric edge_fraction instead)
    double edge_fraction = 0.1;
    double mask_rep_inner_um = 0.0;  // 0 = grid.min (no inner rep absorber)
    double mask_att_inner_um = 0.0;
    double mask_outer_um = 0.0;      // 0 = 10% from the outer edge

    // [dimer_kernels]
    double resonance_mask_lo_um = -1.0;  // -1 = auto-detect +/- 0.5
    double resonance_mask_hi_um = -1.0;
    bool neglect_delta_e = false;
    bool dominant_gamma_only = false;
    bool no_state_transfer = false;
    double gamma_cap_rad_per_us = 0.0;
    double w_cap_radius_um = 0.0;  // 0 = mask_rep_inner

    // [map]
    double map_r_min_um = 3.0, map_r_max_um = 20.0;
    int map_r_count = 40;
    double map_d_min_um = 1.0, map_d_max_um = 2.2;
    int map_d_count = 20;
    double map_t_final_us = 10.0;
    double map_sample_every_us = 0.02;
    double map_dt_factor = 0.5;
    double trace_r_near_um = 6.0, trace_r_far_um = 18.0, trace_d_um = 1.05;

    // [calibration]
    double rc_target_um = 7.5;
    double rc_threshold = 0.1;
    double c3_lo_mhz_um3_over_2pi = 200.0;
    double c3_hi_mhz_um3_over_2pi = 6000.0;

    bool operator==(const Config&) const = default;

    // Derived, angular-unit views.
    UnitSystem units() const { return {hbar_over_mass_um2_per_us}; }
    EitParams eit() const {
        return {angular_from_mhz(omega_p_mhz_over_2pi), angular_from_mhz(omega_c_mhz_over_2pi),
                angular_from_mhz(delta_p_mhz_over_2pi), angular_from_mhz(delta_c_mhz_over_2pi),
                angular_from_mhz(gamma_p_mhz_over_2pi)};
    }
    InteractionParams interactions() const {
        return {angular_from_mhz(c6_us_mhz_um6_over_2pi),
                angular_from_mhz(c4_up_mhz_um4_over_2pi),
                angular_from_mhz(c3_dd_mhz_um3_over_2pi)};
    }
    BoxGeometry gas_geometry() const {
        return {{gas_center_x_um, gas_center_y_um, gas_center_z_um},
                {gas_extent_x_um, gas_extent_y_um, gas_extent_z_um}};
    }
    Grid1D grid() const { return Grid1D::make(grid_min_um, grid_max_um, grid_n); }
    DimerSurface surface() const;

    void validate() const;

    // Scenario presets (paper parameter sets).
    static Config single_well_defaults();
    static Config gamma_map_defaults();
    static Config dimer_bind_defaults();
    static Config defaults_for(const std::string& scenario);
};

Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);
std::string serialize_config(const Config& c);

}  // namespace dsim
