#pragma once

#include "dcsim/config.hpp"

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

inline std::string source_path(const std::string& rel)
{
    return std::string(DCSIM_SOURCE_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("dcsim_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// The shipped 5 x 10 x 40 example configuration.
inline dcsim::DCConfig reference_config()
{
    return dcsim::load_config(source_path("configs/reference.json"));
}

/// Small grid with uniform approach temperatures.
inline dcsim::DCConfig grid_config(std::size_t rows, std::size_t racks_per_row, std::size_t cpus,
                                   double supply_approach = 0.0, double return_approach = 0.0)
{
    dcsim::DCConfig cfg;
    cfg.num_rows = rows;
    cfg.num_racks_per_row = racks_per_row;
    cfg.cpus_per_rack.assign(rows * racks_per_row, cpus);
    cfg.rack_supply_approach_temps.assign(rows * racks_per_row, supply_approach);
    cfg.rack_return_approach_temps.assign(rows * racks_per_row, return_approach);
    return cfg;
}

inline dcsim::PowerCurveParams random_curve(std::mt19937_64& rng, double scale)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    dcsim::PowerCurveParams c;
    c.p_idle = scale * u(rng);
    c.p_full = c.p_idle + scale * 2.0 * u(rng);
    c.p_cap = c.p_full + scale * u(rng) * (u(rng) < 0.3 ? 0.0 : 1.0);
    c.temp_slope = u(rng) < 0.2 ? 0.0 : 3.0 * u(rng);
    c.t_ref = 18.0 + 12.0 * u(rng);
    return c;
}

/// Random valid configuration with at most `max_cpus` CPUs, heterogeneous rack
/// sizes, random curves and a sprinkling of per-rack and per-CPU overrides.
inline dcsim::DCConfig random_config(std::mt19937_64& rng, std::size_t max_cpus)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    dcsim::DCConfig cfg;
    cfg.num_rows = pick(1, 6);
    cfg.num_racks_per_row = pick(1, 20);
    const std::size_t racks = cfg.num_racks();
    const std::size_t target = pick(racks, std::max(racks, max_cpus));
    const std::size_t per_rack_max = std::max<std::size_t>(1, 2 * target / racks);
    std::size_t total = 0;
    for (std::size_t i = 0; i < racks; ++i) {
        const std::size_t remaining_racks = racks - i - 1;
        const std::size_t budget = max_cpus - total - remaining_racks;
        const std::size_t n = std::min(pick(1, per_rack_max), budget);
        cfg.cpus_per_rack.push_back(n);
        total += n;
    }
    for (std::size_t i = 0; i < racks; ++i) {
        cfg.rack_supply_approach_temps.push_back(-1.0 + 6.0 * u(rng));
        cfg.rack_return_approach_temps.push_back(-1.0 + 5.0 * u(rng));
    }
    cfg.c_air = 1000.0 + 20.0 * u(rng);
    cfg.rho_air = 1.1 + 0.2 * u(rng);
    cfg.chiller_cop = 2.0 + 6.0 * u(rng);
    cfg.crac_fan_mass_flow = 5.0 + 60.0 * u(rng);
    cfg.crac_setpoint_min = 12.0 + 4.0 * u(rng);
    cfg.crac_setpoint_max = cfg.crac_setpoint_min + 4.0 + 10.0 * u(rng);
    cfg.it_fan_airflow_ratio_lb = {0.4 * u(rng), 0.3 + 0.5 * u(rng)};
    cfg.it_fan_airflow_ratio_ub = {cfg.it_fan_airflow_ratio_lb[0] + 0.6 * u(rng),
                                   cfg.it_fan_airflow_ratio_lb[1] + 0.6 * u(rng)};
    cfg.it_fan_nominal_airflow = 0.01 + 0.1 * u(rng);
    cfg.it_fan_blend_t_ref = 20.0 + 8.0 * u(rng);
    cfg.it_fan_blend_t_hot = cfg.it_fan_blend_t_ref + 2.0 + 10.0 * u(rng);
    cfg.it_fan_min_airflow_ratio = 0.1 * u(rng);
    cfg.cpu_curve = random_curve(rng, 200.0);
    cfg.fan_curve = random_curve(rng, 30.0);
    const std::size_t n_overrides = pick(0, 4);
    for (std::size_t k = 0; k < n_overrides; ++k) {
        dcsim::CurveOverride ov;
        ov.rack = pick(0, racks - 1);
        if (u(rng) < 0.5)
            ov.cpu = pick(0, cfg.cpus_per_rack[ov.rack] - 1);
        ov.curve = random_curve(rng, u(rng) < 0.5 ? 200.0 : 30.0);
        (u(rng) < 0.5 ? cfg.cpu_curve_overrides : cfg.fan_curve_overrides).push_back(ov);
    }
    cfg.ct_reference_airflow = 10.0 + 90.0 * u(rng);
    cfg.ct_reference_power = 1e4 + 1e5 * u(rng);
    cfg.ct_delta_table.clear();
    const std::size_t points = pick(1, 4);
    double amb = -5.0 + 10.0 * u(rng);
    for (std::size_t k = 0; k < points; ++k) {
        cfg.ct_delta_table.push_back({amb, 0.5 + 14.0 * u(rng)});
        amb += 1.0 + 15.0 * u(rng);
    }
    cfg.ct_delta_min = 0.5 + u(rng);
    return cfg;
}

inline std::vector<double> random_loads(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> loads(n);
    for (auto& l : loads) {
        const double r = u(rng);
        l = r < 0.05 ? 0.0 : (r > 0.95 ? 1.0 : u(rng));
    }
    return loads;
}

} // namespace testing
