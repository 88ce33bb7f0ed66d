#include <doctest.h>

#include <filesystem>

#include "dsim/core/config.hpp"
#include "dsim/core/parallel.hpp"
#include "dsim/io/sha256.hpp"
#include "dsim/maps/kernels.hpp"

using namespace dsim;

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("", 0) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc", 3) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("kernel assembly is bit-identical across thread counts") {
    Config cfg = Config::gamma_map_defaults();
    cfg.c3_dd_mhz_um3_over_2pi = 933.0;
    const auto grid = Grid1D::make(3.0, 11.0, 64);
    const auto gas =
        sample_background({{0, 0, 0}, {12.0, 0.3, 0.3}}, 60.0 / (12.0 * 0.09) * 1e18, 17);

    set_thread_count(1);
    const auto k1 = build_kernels_dimer(gas, grid, cfg.eit(), cfg.interactions(), {});
    set_thread_count(4);
    const auto k4 = build_kernels_dimer(gas, grid, cfg.eit(), cfg.interactions(), {});
    set_thread_count(0);

    for (int s = 0; s < 16; ++s) {
        REQUIRE(k1.slabs[s].size() == k4.slabs[s].size());
        CHECK(k1.slabs[s] == k4.slabs[s]);  // 0 ULP
    }
    CHECK(k1.gdiag12 == k4.gdiag12);
    CHECK(k1.h_sum[1] == k4.h_sum[1]);
}

TEST_CASE("single kernel build reproduces bit-identically") {
    const Config cfg = Config::single_well_defaults();
    const auto grid = Grid1D::make(-6, 6, 64);
    const auto gas = sample_background(cfg.gas_geometry(), 2.963e20, 5);
    set_thread_count(3);
    const auto a = build_kernels_single(gas, grid, cfg.eit(), cfg.interactions());
    set_thread_count(1);
    const auto b = build_kernels_single(gas, grid, cfg.eit(), cfg.interactions());
    set_thread_count(0);
    CHECK(a.gamma == b.gamma);
    CHECK(a.dep == b.dep);
    CHECK(a.depp == b.depp);
    CHECK(a.h_eff == b.h_eff);
}
