#pragma once

#include <map>
#include <string>

#include "dsim/core/config.hpp"
#include "dsim/scen/manifest.hpp"

// Configuration-driven reproduction pipelines. Each scenario emits CSV data
// files (plotting is external), a metrics.json with the scalar observables
// its checks run on, and a manifest with content hashes.

namespace dsim {

struct ScenarioResult {
    Manifest manifest;
    std::map<std::string, double> metrics;
};

// Square dephasing well: kernels + V_ext fit, 500 us propagation with and
// without dephasing, peak-intensity history and density snapshots.
ScenarioResult run_single_well(const Config& cfg, const std::string& out_dir);

// Dimer decoherence benchmark: gamma(r,d) from the exact few-body model and
// from the effective model, their ratio, and the two time-series panels.
ScenarioResult run_gamma_map(const Config& cfg, const std::string& out_dir,
                             bool full_engine_only = false);

// C3 calibration by bisection on the detected R_c, plus the R_c ~ C3^(1/3)
// scaling check.
struct CalibrationResult {
    double c3_mhz_over_2pi = 0.0;
    double rc_um = 0.0;
    double slope = 0.0;  // d log R_c / d log C3
    int iterations = 0;
};
CalibrationResult calibrate_c3(const Config& cfg, double target_rc_um, double c3_lo_mhz,
                               double c3_hi_mhz, std::vector<std::array<double, 2>>* log = nullptr);
ScenarioResult run_calibrate_c3(const Config& cfg, const std::string& out_dir);

// Binding by dephasing: kernels -> 13 us propagation -> surface densities and
// reflection probability; robustness variants and the kernels-off control.
ScenarioResult run_dimer_bind(const Config& cfg, const std::string& out_dir);

// Debug surfaces.
void run_eff_scan(const Config& cfg, const std::string& out_dir, Manifest* manifest = nullptr);
void run_kernels_build(const Config& cfg, const std::string& out_path);
void run_kernels_inspect(const std::string& kernels_path, const std::string& out_dir);

// Scenario-specific assertions behind the CLI --check flag; returns a list
// of failed checks (empty = pass).
std::vector<std::string> check_scenario(const std::string& scenario,
                                        const std::map<std::string, double>& metrics);

}  // namespace dsim
