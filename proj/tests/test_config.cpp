#include "dcsim/config.hpp"
#include "dcsim/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <random>

using namespace dcsim;

namespace {

std::string grid_json(const std::string& extra = "")
{
    std::string supply = "[", ret = "[";
    for (int i = 0; i < 50; ++i) {
        supply += (i ? "," : "") + std::to_string(0.5 + 0.05 * i);
        ret += (i ? "," : "") + std::to_string(1.0 + 0.02 * i);
    }
    supply += "]";
    ret += "]";
    return R"({"NUM_ROWS":5,"NUM_RACKS_PER_ROW":10,"CPUS_PER_RACK":40,)"
           R"("RACK_SUPPLY_APPROACH_TEMP_LIST":)" +
           supply + R"(,"RACK_RETURN_APPROACH_TEMP_LIST":)" + ret + extra + "}";
}

} // namespace

TEST_CASE("table-sized grid parses into 50 racks and 2000 CPUs")
{
    const DCConfig cfg = parse_config(grid_json());
    CHECK(cfg.num_rows == 5);
    CHECK(cfg.num_racks_per_row == 10);
    CHECK(cfg.num_racks() == 50);
    CHECK(cfg.cpus_per_rack.size() == 50);
    CHECK(cfg.num_cpus() == 2000);
    CHECK(validate_config(cfg).empty());
}

TEST_CASE("air and chiller constants are read verbatim")
{
    const DCConfig cfg = parse_config(grid_json(R"(,"C_AIR":1006,"CHILLER_COP":6.0)"));
    CHECK(cfg.c_air == 1006.0);
    CHECK(cfg.chiller_cop == 6.0);
}

TEST_CASE("shipped example config carries the published example values")
{
    const DCConfig cfg = testing::reference_config();
    CHECK(cfg.num_rows == 5);
    CHECK(cfg.num_racks_per_row == 10);
    CHECK(cfg.num_cpus() == 2000);
    CHECK(cfg.c_air == 1006.0);
    CHECK(cfg.chiller_cop == 6.0);
    CHECK(cfg.it_fan_airflow_ratio_lb == std::array<double, 2>{0.0, 0.6});
    CHECK(cfg.it_fan_airflow_ratio_ub == std::array<double, 2>{0.7, 1.3});
    CHECK(validate_config(cfg).empty());
}

TEST_CASE("empty object names the first required key")
{
    try {
        parse_config("{}");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.key() == "NUM_ROWS");
        CHECK(std::string(e.what()).find("NUM_ROWS") != std::string::npos);
    }
}

TEST_CASE("malformed and mistyped input")
{
    CHECK_THROWS_AS(parse_config("{\"NUM_ROWS\": 5,"), SyntaxError);
    CHECK_THROWS_AS(parse_config("[1, 2]"), SyntaxError);
    CHECK_THROWS_AS(parse_config(grid_json(R"(,"C_AIR":"warm")")), SchemaError);
    CHECK_THROWS_AS(parse_config(grid_json(R"(,"NOT_A_KEY":1)")), SchemaError);
    CHECK_THROWS_AS(parse_config(grid_json(R"(,"IT_FAN_AIRFLOW_RATIO_LB":[0.1])")), SchemaError);
    try {
        parse_config(grid_json(R"(,"CHILLER_COP":"six")"));
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.key() == "CHILLER_COP");
    }
}

TEST_CASE("per-rack CPU counts")
{
    DCConfig cfg = parse_config(R"({"NUM_ROWS":1,"NUM_RACKS_PER_ROW":3,"CPUS_PER_RACK":[4,5,6],
        "RACK_SUPPLY_APPROACH_TEMP_LIST":[0,1,2],"RACK_RETURN_APPROACH_TEMP_LIST":[0,0,0]})");
    CHECK(cfg.num_cpus() == 15);
    CHECK(cfg.cpus_per_rack == std::vector<std::size_t>{4, 5, 6});
    CHECK(validate_config(cfg).empty());
}

TEST_CASE("validation reports each broken invariant by field")
{
    SUBCASE("approach list of length 3 for 50 racks")
    {
        DCConfig cfg = parse_config(grid_json());
        cfg.rack_supply_approach_temps = {1.0, 2.0, 3.0};
        const auto v = validate_config(cfg);
        REQUIRE(v.size() == 1);
        CHECK(v[0].field == "rack_supply_approach_temp_list");
    }
    SUBCASE("negative COP")
    {
        DCConfig cfg = parse_config(grid_json());
        cfg.chiller_cop = -1.0;
        const auto v = validate_config(cfg);
        REQUIRE(v.size() == 1);
        CHECK(v[0].field == "chiller_cop");
    }
    SUBCASE("setpoint bounds out of order")
    {
        DCConfig cfg = parse_config(grid_json());
        cfg.crac_setpoint_min = 30.0;
        CHECK(validate_config(cfg).size() == 1);
    }
    SUBCASE("lb above ub")
    {
        DCConfig cfg = parse_config(grid_json());
        cfg.it_fan_airflow_ratio_lb = {0.8, 0.6};
        const auto v = validate_config(cfg);
        REQUIRE(v.size() == 1);
        CHECK(v[0].field == "it_fan_airflow_ratio_ub");
    }
    SUBCASE("ct delta table not increasing, zero delta")
    {
        DCConfig cfg = parse_config(grid_json());
        cfg.ct_delta_table = {{20.0, 5.0}, {10.0, 0.0}};
        CHECK(validate_config(cfg).size() == 2);
        cfg.ct_delta_table.clear();
        CHECK(validate_config(cfg).size() == 1);
    }
    SUBCASE("curve ordering and override range")
    {
        DCConfig cfg = parse_config(grid_json());
        cfg.cpu_curve.p_idle = 500.0;
        cfg.fan_curve_overrides.push_back({60, std::nullopt, cfg.fan_curve});
        const auto v = validate_config(cfg);
        REQUIRE(v.size() == 2);
        CHECK(v[0].field == "cpu_curve");
        CHECK(v[1].field == "fan_curve_overrides[0]");
    }
    SUBCASE("zero counts")
    {
        DCConfig cfg = testing::grid_config(1, 2, 3);
        cfg.cpus_per_rack[1] = 0;
        CHECK_FALSE(validate_config(cfg).empty());
        CHECK_THROWS_AS(require_valid(cfg), SchemaError);
    }
}

TEST_CASE("override precedence: per-CPU, then per-rack, then default; later wins")
{
    DCConfig cfg = testing::grid_config(1, 2, 4);
    PowerCurveParams a{1, 2, 0, 25, 3}, b{4, 5, 0, 25, 6}, c{7, 8, 0, 25, 9}, d{10, 11, 0, 25, 12};
    cfg.cpu_curve_overrides = {{0, 2, a}, {0, std::nullopt, b}, {0, 2, c}, {1, std::nullopt, d}};
    CHECK(cfg.cpu_curve_for(0, 2) == c);
    CHECK(cfg.cpu_curve_for(0, 1) == b);
    CHECK(cfg.cpu_curve_for(1, 2) == d);
    CHECK(cfg.fan_curve_for(0, 2) == cfg.fan_curve);
}

TEST_CASE("serialize and reparse gives an equal config")
{
    SUBCASE("shipped example")
    {
        const DCConfig cfg = testing::reference_config();
        CHECK(parse_config(serialize_config(cfg)) == cfg);
    }
    SUBCASE("random configs with overrides and ragged racks")
    {
        std::mt19937_64 rng(11);
        for (int k = 0; k < 50; ++k) {
            const DCConfig cfg = testing::random_config(rng, 3000);
            REQUIRE(validate_config(cfg).empty());
            const DCConfig back = parse_config(serialize_config(cfg));
            CHECK(back == cfg);
            CHECK(serialize_config(back) == serialize_config(cfg));
        }
    }
}

TEST_CASE("missing config file is an I/O error")
{
    CHECK_THROWS_AS(load_config("/nonexistent/dcsim.json"), IoError);
}
