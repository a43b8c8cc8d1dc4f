#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dcsim {

/// Linear power curve of one CPU or one IT fan:
///   clamp(p_idle + (p_full - p_idle) * load + temp_slope * max(0, T - t_ref), 0, p_cap)
struct PowerCurveParams {
    double p_idle = 0.0;     // W at zero load
    double p_full = 0.0;     // W at full load
    double temp_slope = 0.0; // W/K above t_ref
    double t_ref = 25.0;     // degC
    double p_cap = 0.0;      // W

    bool operator==(const PowerCurveParams&) const = default;
};

/// Replaces the default curve for a whole rack, or for one CPU in it when `cpu` is set.
struct CurveOverride {
    std::size_t rack = 0;
    std::optional<std::size_t> cpu;
    PowerCurveParams curve;

    bool operator==(const CurveOverride&) const = default;
};

/// One breakpoint of the cooling-tower approach curve (ambient dry-bulb -> delta).
struct CtDeltaPoint {
    double ambient_c = 0.0;
    double delta_k = 0.0;

    bool operator==(const CtDeltaPoint&) const = default;
};

/// Static description of a data center: geometry, IT curves, air and HVAC constants.
/// Racks are indexed row-major: rack = row * num_racks_per_row + column.
struct DCConfig {
    std::size_t num_rows = 0;
    std::size_t num_racks_per_row = 0;
    std::vector<std::size_t> cpus_per_rack; // one entry per rack after normalization

    std::vector<double> rack_supply_approach_temps; // K, added to the CRAC supply setpoint
    std::vector<double> rack_return_approach_temps; // K, added to each rack outlet

    double c_air = 1006.0;            // J/(kg K)
    double rho_air = 1.225;           // kg/m^3
    double chiller_cop = 6.0;
    double crac_fan_mass_flow = 30.0; // kg/s
    double crac_setpoint_min = 15.0;  // degC
    double crac_setpoint_max = 27.0;  // degC

    std::array<double, 2> it_fan_airflow_ratio_lb{0.0, 0.6}; // cool regime, (load 0, load 1)
    std::array<double, 2> it_fan_airflow_ratio_ub{0.7, 1.3}; // hot regime, (load 0, load 1)
    double it_fan_nominal_airflow = 0.05;   // m^3/s per CPU at ratio 1
    double it_fan_blend_t_ref = 25.0;       // degC, fully cool regime at or below
    double it_fan_blend_t_hot = 35.0;       // degC, fully hot regime at or above
    double it_fan_min_airflow_ratio = 0.05; // floor applied when aggregating rack airflow

    PowerCurveParams cpu_curve{100.0, 300.0, 1.0, 25.0, 400.0};
    PowerCurveParams fan_curve{10.0, 50.0, 0.5, 25.0, 80.0};
    std::vector<CurveOverride> cpu_curve_overrides;
    std::vector<CurveOverride> fan_curve_overrides;

    double ct_reference_airflow = 50.0;  // m^3/s
    double ct_reference_power = 50000.0; // W
    std::vector<CtDeltaPoint> ct_delta_table{{10.0, 12.0}, {35.0, 4.0}};
    double ct_delta_min = 1.0; // K

    double timestep_seconds = 900.0;

    std::string weather_path;
    std::string ci_path;
    std::string workload_path;

    std::size_t num_racks() const noexcept { return num_rows * num_racks_per_row; }
    std::size_t num_cpus() const noexcept;

    /// Effective curve for CPU `cpu` of rack `rack` (per-CPU override, then per-rack, then default).
    /// Within a tier the last matching override wins.
    PowerCurveParams cpu_curve_for(std::size_t rack, std::size_t cpu) const;
    PowerCurveParams fan_curve_for(std::size_t rack, std::size_t cpu) const;

    bool operator==(const DCConfig&) const = default;
};

struct Violation {
    std::string field;
    std::string message;

    bool operator==(const Violation&) const = default;
};

/// Parses the JSON configuration. Keys are the upper-snake-case names (NUM_ROWS, C_AIR, ...).
/// Throws SyntaxError for malformed JSON and SchemaError for missing, unknown or mistyped keys.
DCConfig parse_config(std::string_view json_text);

/// Reads and parses a config file. Throws IoError if the file cannot be read.
DCConfig load_config(const std::string& path);

/// Serializes to JSON text that parse_config() maps back to an equal DCConfig.
std::string serialize_config(const DCConfig& cfg);

/// Returns every violated invariant; empty means the config is valid.
std::vector<Violation> validate_config(const DCConfig& cfg);

/// Throws SchemaError built from the first violation, listing all of them.
void require_valid(const DCConfig& cfg);

std::vector<Violation> validate_curve(const PowerCurveParams& curve, const std::string& field);

} // namespace dcsim
