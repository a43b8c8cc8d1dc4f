#pragma once

#include "dcsim/config.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dcsim {

/// Per-rack result of the IT power model for one time step.
struct RackThermalState {
    double inlet_temp = 0.0;           // degC
    std::vector<double> per_cpu_load;  // fractions in [0, 1]
    double cpu_power_w = 0.0;
    double fan_power_w = 0.0;
    double rack_power_w = 0.0;         // cpu_power_w + fan_power_w
    double rack_airflow = 0.0;         // m^3/s through the rack's server fans
};

/// Rack inlet temperatures: approach[i] + supply_setpoint.
std::vector<double> rack_inlet_temps(double supply_setpoint, std::span<const double> approach);
void rack_inlet_temps(double supply_setpoint, std::span<const double> approach,
                      std::span<double> out);

/// Evaluates a linear power curve; load must lie in [0, 1].
double cpu_power(const PowerCurveParams& curve, double inlet_temp, double load);
double fan_power(const PowerCurveParams& curve, double inlet_temp, double load);

/// IT fan airflow ratio. `lb` holds the (load 0, load 1) ratios of the cool regime,
/// `ub` those of the hot regime; the two are blended linearly in inlet temperature
/// between t_ref and t_hot.
double fan_airflow_ratio(double load, double inlet_temp, const std::array<double, 2>& lb,
                         const std::array<double, 2>& ub, double t_ref, double t_hot);

/// Sums the per-CPU curves of one rack. Rack airflow is the sum of the per-CPU
/// ratios (floored at cfg.it_fan_min_airflow_ratio) times the nominal airflow.
RackThermalState rack_power(const DCConfig& cfg, std::size_t rack_index, double inlet_temp,
                            std::span<const double> per_cpu_load);

/// Sum of rack powers in rack order; throws EmptyInput for an empty list.
double datacenter_it_power(std::span<const RackThermalState> racks);

/// In-place output of ItModel::evaluate, one entry per rack.
struct ItState {
    std::vector<double> inlet_c;
    std::vector<double> cpu_w;
    std::vector<double> fan_w;
    std::vector<double> rack_w;
    std::vector<double> airflow_m3s;
    double total_cpu_w = 0.0;
    double total_fan_w = 0.0;
    double total_w = 0.0;

    void resize(std::size_t racks);
};

/// Vectorized IT model. The configuration is flattened once into contiguous
/// per-rack and per-CPU arrays; evaluate() then streams over the per-CPU load
/// vector without allocating. Racks whose CPUs all share one curve skip the
/// per-CPU parameter arrays entirely.
///
/// CPUs are summed in index order and racks in row-major order, the same order
/// as rack_power() and datacenter_it_power().
class ItModel {
public:
    explicit ItModel(const DCConfig& cfg);

    std::size_t num_racks() const noexcept { return rack_offsets_.size() - 1; }
    std::size_t num_cpus() const noexcept { return rack_offsets_.back(); }

    /// First CPU index of each rack, plus a trailing total.
    std::span<const std::size_t> rack_offsets() const noexcept { return rack_offsets_; }

    /// Loads must hold num_cpus() entries in [0, 1]; they are not re-checked here.
    void evaluate(double supply_setpoint, std::span<const double> cpu_loads, ItState& out) const;

    /// Every CPU at `load`. Racks without per-CPU overrides cost O(1) instead of O(CPUs);
    /// sums become products, so results differ from evaluate() by rounding only.
    void evaluate_uniform(double supply_setpoint, double load, ItState& out) const;

private:
    struct Curve {
        double idle;
        double span; // p_full - p_idle
        double slope;
        double t_ref;
        double cap;
    };
    struct CurveColumns {
        std::vector<double> idle, span, slope, t_ref, cap;
        void push(const Curve& c);
    };

    std::vector<std::size_t> rack_offsets_;
    std::vector<double> supply_approach_;
    std::vector<Curve> rack_cpu_curve_;
    std::vector<Curve> rack_fan_curve_;
    std::vector<std::uint8_t> rack_uniform_;
    // Per-CPU parameters; populated only when some rack has per-CPU overrides.
    CurveColumns cpu_cols_;
    CurveColumns fan_cols_;

    double lb0_, lb_slope_, ub0_, ub_slope_;
    double blend_t_ref_, blend_width_;
    double min_ratio_;
    double nominal_airflow_;
};

} // namespace dcsim
