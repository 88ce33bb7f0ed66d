#include <doctest.h>

#include "dsim/core/config.hpp"
#include "dsim/core/units.hpp"

using namespace dsim;

TEST_CASE("config round trip is exact") {
    Config c = Config::dimer_bind_defaults();
    c.c3_dd_mhz_um3_over_2pi = 1822.3341897654321;
    c.gas_seed = 987654321123456789ULL;
    c.dt_safety = 0.314159265358979312;
    const Config back = parse_config_text(serialize_config(c));
    CHECK(back == c);
}

TEST_CASE("angular conversion happens exactly once, at the accessor") {
    Config c;
    c.omega_c_mhz_over_2pi = 5.0;
    CHECK(c.eit().omega_c == doctest::Approx(2.0 * 3.14159265358979 * 5.0));
}

TEST_CASE("unknown keys and malformed lines are config errors") {
    CHECK_THROWS_AS(parse_config_text("[eit]\nnonsense_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[eit]\nomega_p_mhz_over_2pi 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[eit\nomega_p_mhz_over_2pi = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[grid]\nn = twelve\n"), ConfigError);
}

TEST_CASE("comments and partial configs") {
    const Config c = parse_config_text(
        "# comment line\n"
        "[eit]\n"
        "omega_p_mhz_over_2pi = 1.25  # inline comment\n");
    CHECK(c.omega_p_mhz_over_2pi == 1.25);
    CHECK(c.omega_c_mhz_over_2pi == 5.0);  // untouched default
}

TEST_CASE("validation catches bad scenarios and grids") {
    Config c;
    c.scenario = "bogus";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = Config{};
    c.grid_n = 100;
    CHECK_THROWS(c.validate());
    c = Config{};
    c.wp_surface = "sideways";
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("weak-probe flag warns without erroring") {
    Config c;
    c.omega_p_mhz_over_2pi = 10.0;
    c.omega_c_mhz_over_2pi = 5.0;
    CHECK(!c.eit().validate().empty());
    c.omega_p_mhz_over_2pi = 0.05;
    CHECK(c.eit().validate().empty());
}
