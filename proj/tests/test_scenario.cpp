#include <doctest.h>

#include <cmath>

#include "mfris/rng.hpp"
#include "mfris/scenario.hpp"
#include "mfris/units.hpp"

using namespace mfris;

TEST_CASE("decibel conversions") {
    CHECK(db_to_linear(0.0) == 1.0);
    CHECK(dbm_to_watts(-70.0) == doctest::Approx(1.0e-10).epsilon(1e-12));
    CHECK(db_to_linear(13.0) == doctest::Approx(19.953).epsilon(1e-3 / 19.953));

    // Round trip within 1e-12 relative across the physical range.
    RngStream rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = std::pow(10.0, rng.uniform(-20.0, 3.0));
        CHECK(db_to_linear(linear_to_db(x)) == doctest::Approx(x).epsilon(1e-12));
        CHECK(dbm_to_watts(watts_to_dbm(x)) == doctest::Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("omega recomputed from circuit constants") {
    RngStream rng(2);
    for (int i = 0; i < 200; ++i) {
        ScenarioConfig cfg;
        cfg.energy.a = rng.uniform(10.0, 500.0);
        cfg.energy.q = rng.uniform(1e-3, 50e-3);
        cfg.energy.Omega = 0.77; // bogus supplied value must be overwritten
        REQUIRE(validate(cfg).ok());
        const double expected = 1.0 / (1.0 + std::exp(cfg.energy.a * cfg.energy.q));
        CHECK(std::abs(cfg.energy.Omega - expected) <= 1e-15);
    }
}

TEST_CASE("validation accepts the default scenario") {
    ScenarioConfig cfg;
    CHECK(validate(cfg).ok());
}

TEST_CASE("validation rejects invariant violations with named errors") {
    ScenarioConfig cfg;
    cfg.beta_max = 0.5;
    cfg.energy.a = -150.0;
    const ValidationReport rep = validate(cfg);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.joined().find("beta_max") != std::string::npos);
    CHECK(rep.joined().find("a > 0") != std::string::npos);
}

TEST_CASE("json config parsing") {
    SUBCASE("minimal document keeps defaults") {
        const ScenarioConfig cfg = load_config_json(R"({"schema_version":"mfris-config/1"})");
        CHECK(cfg.N == 4);
        CHECK(cfg.K == 3);
        CHECK(cfg.sigma0_sq == doctest::Approx(1e-10));
    }
    SUBCASE("system overrides convert to linear units") {
        const ScenarioConfig cfg = load_config_json(R"({
            "schema_version":"mfris-config/1",
            "system": {"n_antennas":2, "n_users":1, "n_elements":16,
                       "p_bs_max_dbm":30.0, "beta_max_db":13.0}})");
        CHECK(cfg.N == 2);
        CHECK(cfg.M == 16);
        CHECK(cfg.P_BS_max == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(cfg.beta_max == doctest::Approx(19.952623).epsilon(1e-6));
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS(load_config_json(R"({"schema_version":"mfris-config/1","sytem":{}})"));
        CHECK_THROWS(load_config_json(
            R"({"schema_version":"mfris-config/1","system":{"n_antenas":2}})"));
    }
    SUBCASE("schema version is mandatory") {
        CHECK_THROWS(load_config_json(R"({"system":{}})"));
        CHECK_THROWS(load_config_json(R"({"schema_version":"other/9"})"));
    }
    SUBCASE("invariants enforced after parsing") {
        CHECK_THROWS(load_config_json(
            R"({"schema_version":"mfris-config/1","system":{"beta_max_db":-3.0}})"));
    }
}
