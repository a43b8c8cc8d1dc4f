#include "dcsim/errors.hpp"
#include "dcsim/timeseries.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace dcsim;
using doctest::Approx;

namespace {

RawSeries series(SeriesKind kind, const std::string& body)
{
    return parse_series("timestamp,value\n" + body, kind);
}

RawInputs hourly_inputs(int hours)
{
    std::string w, c, l;
    for (int h = 0; h < hours; ++h) {
        const std::string t = std::to_string(3600 * h);
        w += t + "," + std::to_string(10 + 4 * h) + "\n";
        c += t + "," + std::to_string(0.4 + 0.1 * h) + "\n";
        l += t + "," + (h % 2 ? "0.8" : "0.2") + "\n";
    }
    return {series(SeriesKind::Weather, w), series(SeriesKind::CarbonIntensity, c),
            series(SeriesKind::Workload, l), std::nullopt};
}

} // namespace

TEST_CASE("timestamps: epoch and ISO-8601 UTC")
{
    CHECK(parse_timestamp("1672531200") == 1672531200);
    CHECK(parse_timestamp("2023-01-01T00:00:00Z") == 1672531200);
    CHECK(parse_timestamp("2023-01-01 00:15") == 1672531200 + 900);
    CHECK(parse_timestamp("2023-01-01T00:15:00+00:00") == 1672531200 + 900);
    CHECK(parse_timestamp("2024-02-29T12:00:00") == 1709208000);
    CHECK_FALSE(parse_timestamp("2023-02-30T00:00:00"));
    CHECK_FALSE(parse_timestamp("yesterday"));
    CHECK_FALSE(parse_timestamp("2023-01-01T25:00"));
}

TEST_CASE("parsing a small CSV")
{
    const auto s = series(SeriesKind::Weather, "2023-01-01T00:00:00Z,10.5\n2023-01-01T01:00:00Z,12\n");
    CHECK(s.size() == 2);
    CHECK(s.values.at(0) == std::vector<double>{10.5, 12.0});
    CHECK(s.resolution == 3600);

    const auto per_cpu =
        parse_series("timestamp,cpu_0,cpu_1\n0,0.1,0.2\n900,0.3,0.4\n", SeriesKind::Workload);
    CHECK(per_cpu.columns == std::vector<std::string>{"cpu_0", "cpu_1"});
    CHECK(per_cpu.values[1] == std::vector<double>{0.2, 0.4});
}

TEST_CASE("parse errors name the row")
{
    try {
        series(SeriesKind::Weather, "0,1\n3600,2\n3600,3\n");
        FAIL("expected OrderError");
    } catch (const OrderError& e) {
        CHECK(e.row() == 4);
    }
    CHECK_THROWS_AS(series(SeriesKind::Weather, "0,1\n-5,2\n"), OrderError);
    try {
        series(SeriesKind::Workload, "0,0.5\n900,1.5\n");
        FAIL("expected RangeError");
    } catch (const RangeError& e) {
        CHECK(e.row() == 3);
        CHECK(e.column() == 2);
    }
    CHECK_THROWS_AS(series(SeriesKind::CarbonIntensity, "0,-0.1\n"), RangeError);
    CHECK_THROWS_AS(series(SeriesKind::Weather, "0,abc\n"), ParseError);
    CHECK_THROWS_AS(series(SeriesKind::Weather, "0,1,2\n"), ParseError);
    CHECK_THROWS_AS(parse_series("time,value\n0,1\n", SeriesKind::Weather), ParseError);
    CHECK_THROWS_AS(parse_series("", SeriesKind::Weather), ParseError);
    CHECK_THROWS_AS(load_series("/nonexistent/weather.csv", SeriesKind::Weather), IoError);
}

TEST_CASE("hourly weather interpolates onto a 15-minute grid; workload holds")
{
    const auto in = align(hourly_inputs(3), 900);
    // Interpolated series end at their last sample; the held workload covers one more hour.
    REQUIRE(in.size() == 9);
    CHECK(in.timestamps[1] == 900);
    CHECK(in.ambient_c[0] == 10.0);
    CHECK(in.ambient_c[1] == Approx(11.0).epsilon(1e-15));
    CHECK(in.ambient_c[2] == Approx(12.0).epsilon(1e-15));
    CHECK(in.ambient_c[3] == Approx(13.0).epsilon(1e-15));
    CHECK(in.ambient_c[4] == 14.0);
    CHECK(in.carbon_intensity[1] == Approx(0.425).epsilon(1e-15));
    for (int k = 0; k < 4; ++k)
        CHECK(in.workload[k] == 0.2);
    for (int k = 4; k < 8; ++k)
        CHECK(in.workload[k] == 0.8);
}

TEST_CASE("coverage and gap failures")
{
    auto raws = hourly_inputs(3);
    CHECK_THROWS_AS(align(raws, 900, {std::nullopt, 20}), CoverageError);
    CHECK_THROWS_AS(align(raws, 900, {-900, 4}), CoverageError);

    RawInputs gappy = hourly_inputs(8);
    gappy.weather = series(SeriesKind::Weather, "0,1\n3600,2\n7200,3\n21600,4\n25200,5\n");
    CHECK_THROWS_AS(align(gappy, 900), GapError);
    // The gap is outside a window that stops before it.
    CHECK_NOTHROW(align(gappy, 900, {0, 8}));

    raws.workload = series(SeriesKind::Workload, "600,0.1\n4200,0.2\n");
    CHECK_THROWS_AS(align(raws, 900, {0, 4}), CoverageError);
}

TEST_CASE("alignment is idempotent and stays within the source range")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-10.0, 40.0);
    std::string w, c, l;
    for (int k = 0; k < 200; ++k) {
        const std::string t = std::to_string(1800 * k);
        w += t + "," + std::to_string(u(rng)) + "\n";
        c += t + "," + std::to_string(0.5 + u(rng) / 100.0) + "\n";
        l += t + "," + std::to_string((u(rng) + 10.0) / 50.0) + "\n";
    }
    const RawInputs raws{series(SeriesKind::Weather, w), series(SeriesKind::CarbonIntensity, c),
                         series(SeriesKind::Workload, l), std::nullopt};
    const auto once = align(raws, 900);
    const auto& src = raws.weather.values[0];
    const auto [lo, hi] = std::minmax_element(src.begin(), src.end());
    for (double v : once.ambient_c) {
        CHECK(v >= *lo);
        CHECK(v <= *hi);
    }

    auto to_raw = [&](SeriesKind kind, const std::vector<double>& v) {
        RawSeries s;
        s.kind = kind;
        s.timestamps = once.timestamps;
        s.columns = {"value"};
        s.values = {v};
        s.resolution = once.timestep_seconds;
        return s;
    };
    const RawInputs again{to_raw(SeriesKind::Weather, once.ambient_c),
                          to_raw(SeriesKind::CarbonIntensity, once.carbon_intensity),
                          to_raw(SeriesKind::Workload, once.workload), std::nullopt};
    CHECK(align(again, 900) == once);
}

TEST_CASE("save and reload reproduce the inputs bit for bit")
{
    SyntheticSpec spec;
    spec.steps = 500;
    spec.seed = 3;
    const auto in = synthetic_inputs(spec);
    const auto dir = testing::scratch_dir("roundtrip");
    save_inputs(in, dir.string());
    const auto back = load_inputs((dir / "weather.csv").string(), (dir / "ci.csv").string(),
                                  (dir / "workload.csv").string(), 900);
    CHECK(back == in);
}

TEST_CASE("per-CPU workload columns give a matrix and a mean aggregate")
{
    auto raws = hourly_inputs(2);
    raws.workload = parse_series("timestamp,cpu_0,cpu_1,cpu_2\n0,0.1,0.2,0.6\n3600,1,0,0.5\n",
                                 SeriesKind::Workload);
    const auto in = align(raws, 900);
    REQUIRE(in.per_cpu_columns == 3);
    REQUIRE(in.size() == 5);
    CHECK(in.per_cpu_workload.size() == 15);
    CHECK(in.workload[0] == Approx(0.3).epsilon(1e-15));
    CHECK(in.per_cpu_workload[4 * 3 + 2] == 0.5);
}

TEST_CASE("synthetic traces are deterministic and valid")
{
    SyntheticSpec spec;
    spec.steps = 96 * 7;
    const auto a = synthetic_inputs(spec), b = synthetic_inputs(spec);
    CHECK(a == b);
    spec.seed = 1;
    CHECK_FALSE(synthetic_inputs(spec) == a);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.workload[k] >= 0.0);
        CHECK(a.workload[k] <= 1.0);
        CHECK(a.carbon_intensity[k] >= 0.0);
    }
    spec.constant_workload = 0.5;
    spec.constant_ambient = 20.0;
    const auto flat = synthetic_inputs(spec);
    CHECK(std::all_of(flat.workload.begin(), flat.workload.end(), [](double v) { return v == 0.5; }));
    CHECK(std::all_of(flat.ambient_c.begin(), flat.ambient_c.end(), [](double v) { return v == 20.0; }));
}
