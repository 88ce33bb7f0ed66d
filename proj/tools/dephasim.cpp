// dephasim: trapping and binding of Rydberg atoms by spatially selective
// dephasing from an EIT-interrogated background gas.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure,
// 4 acceptance-check failure (--check).

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "dsim/core/config.hpp"
#include "dsim/core/parallel.hpp"
#include "dsim/scen/scenarios.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    uint64_t seed = 0;
    unsigned threads = 0;
    bool check = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_check = true) {
    cmd->add_option("--config", a.config_path, "config file (defaults per scenario)");
    cmd->add_option("--out-dir", a.out_dir, "output directory");
    cmd->add_option("--seed", a.seed, "override gas seed");
    cmd->add_option("--threads", a.threads, "worker pool cap (0 = hardware)");
    if (with_check) cmd->add_flag("--check", a.check, "run scenario assertions, exit 4 on fail");
}

dsim::Config resolve_config(const CommonArgs& a, const std::string& scenario) {
    dsim::Config cfg = a.config_path.empty() ? dsim::Config::defaults_for(scenario)
                                             : dsim::load_config(a.config_path);
    cfg.scenario = scenario;
    if (a.seed != 0) cfg.gas_seed = a.seed;
    cfg.validate();
    const std::string warn = cfg.eit().validate();
    if (!warn.empty()) std::fprintf(stderr, "%s\n", warn.c_str());
    return cfg;
}

int finish(const dsim::ScenarioResult& res, const CommonArgs& a, const std::string& scenario) {
    for (const auto& [k, v] : res.metrics) std::printf("%-28s %.6g\n", k.c_str(), v);
    if (!a.check) return 0;
    const auto fails = dsim::check_scenario(scenario, res.metrics);
    for (const auto& f : fails) std::fprintf(stderr, "check failed: %s\n", f.c_str());
    std::printf("checks: %s\n", fails.empty() ? "pass" : "FAIL");
    return fails.empty() ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dephasing-induced trapping and binding simulator"};
    app.require_subcommand(1);

    CommonArgs a;
    auto* sw = app.add_subcommand("single-well", "square dephasing well (500 us trapping run)");
    add_common(sw, a);
    auto* gm = app.add_subcommand("gamma-map", "gamma(r,d) benchmark, exact vs effective");
    add_common(gm, a);
    auto* fe = app.add_subcommand("full-vs-eff", "gamma(r,d) from the exact model + traces");
    add_common(fe, a);
    auto* cal = app.add_subcommand("calibrate-c3", "bisect C3 to the target R_c");
    add_common(cal, a);
    double target_rc = 0;
    cal->add_option("--target-rc", target_rc, "target R_c in um (default from config)");
    auto* db = app.add_subcommand("dimer-bind", "binding by dephasing (13 us dimer run)");
    add_common(db, a);
    auto* es = app.add_subcommand("eff-scan", "dump effective h/l entries vs r");
    add_common(es, a, false);

    auto* dump = app.add_subcommand("config", "print the default config for a scenario");
    std::string dump_scenario = "single-well";
    dump->add_option("--scenario", dump_scenario, "single-well|gamma-map|dimer-bind|calibrate-c3");

    auto* kern = app.add_subcommand("kernels", "kernel cache utilities");
    kern->require_subcommand(1);
    auto* kb = kern->add_subcommand("build", "build kernels and write the binary container");
    std::string kout = "kernels.bin", kin;
    add_common(kb, a, false);
    kb->add_option("--out", kout, "output container path");
    auto* ki = kern->add_subcommand("inspect", "emit CSV slices from a kernel container");
    ki->add_option("--in", kin, "kernel container path")->required();
    ki->add_option("--out-dir", a.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        dsim::set_thread_count(a.threads);
        if (sw->parsed()) {
            const auto cfg = resolve_config(a, "single-well");
            return finish(dsim::run_single_well(cfg, a.out_dir), a, "single-well");
        }
        if (gm->parsed()) {
            const auto cfg = resolve_config(a, "gamma-map");
            return finish(dsim::run_gamma_map(cfg, a.out_dir), a, "gamma-map");
        }
        if (fe->parsed()) {
            auto cfg = resolve_config(a, "gamma-map");
            return finish(dsim::run_gamma_map(cfg, a.out_dir, true), a, "full-vs-eff");
        }
        if (cal->parsed()) {
            auto cfg = resolve_config(a, "calibrate-c3");
            if (target_rc > 0) cfg.rc_target_um = target_rc;
            return finish(dsim::run_calibrate_c3(cfg, a.out_dir), a, "calibrate-c3");
        }
        if (db->parsed()) {
            const auto cfg = resolve_config(a, "dimer-bind");
            return finish(dsim::run_dimer_bind(cfg, a.out_dir), a, "dimer-bind");
        }
        if (es->parsed()) {
            const auto cfg = resolve_config(a, "gamma-map");
            dsim::run_eff_scan(cfg, a.out_dir);
            return 0;
        }
        if (dump->parsed()) {
            std::fputs(dsim::serialize_config(dsim::Config::defaults_for(dump_scenario)).c_str(),
                       stdout);
            return 0;
        }
        if (kb->parsed()) {
            const auto cfg = a.config_path.empty() ? dsim::Config::defaults_for("dimer-bind")
                                                   : dsim::load_config(a.config_path);
            dsim::run_kernels_build(cfg, kout);
            return 0;
        }
        if (ki->parsed()) {
            dsim::run_kernels_inspect(kin, a.out_dir);
            return 0;
        }
    } catch (const dsim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
