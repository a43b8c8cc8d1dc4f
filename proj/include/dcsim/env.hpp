#pragma once

#include "dcsim/config.hpp"
#include "dcsim/hvac_model.hpp"
#include "dcsim/it_model.hpp"
#include "dcsim/timeseries.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dcsim {

enum class WorkloadDistribution {
    Auto,       // PerCpuTrace when the trace has one column per CPU, else Uniform
    Uniform,    // every CPU runs at the aggregate utilization
    Weighted,   // CPU j runs at min(1, B_t * cpu_weights[j])
    PerCpuTrace // per-CPU columns of the workload trace
};

struct EnvOptions {
    double episode_days = 7.0;
    std::optional<std::size_t> episode_steps; // overrides episode_days when set
    double w_energy = 0.0;
    double w_carbon = 1.0;
    double reward_scale = 1e3;
    WorkloadDistribution distribution = WorkloadDistribution::Auto;
    std::vector<double> cpu_weights;
    std::optional<double> initial_setpoint; // previous-setpoint feature after reset; default midpoint
    std::size_t action_bins = 0;            // >= 2 enables discrete_action()
    bool check_energy_balance = false;      // verify the rack energy balance every step
};

struct Observation {
    static constexpr std::size_t kSize = 12;

    double hour_sin = 0.0;
    double hour_cos = 0.0;
    double day_sin = 0.0;
    double day_cos = 0.0;
    double workload = 0.0;
    double ambient_c = 0.0;
    double carbon_intensity = 0.0;
    double crac_setpoint_prev = 0.0;
    double crac_return_temp_prev = 0.0;
    double p_it_prev_w = 0.0;
    double p_hvac_prev_w = 0.0;
    double bat_soc = 1.0;

    std::array<double, kSize> to_array() const;
    static const std::array<std::string_view, kSize>& names();
    bool operator==(const Observation&) const = default;
};

/// Dynamic state of the model after a step; per-rack vectors are row-major.
struct SimState {
    std::vector<double> cpu_loads; // empty under uniform distribution; see uniform_load
    double uniform_load = 0.0;     // common load of every CPU under uniform distribution
    ItState it;
    HVACResult hvac;
    double supply_setpoint = 0.0;
    double ambient_c = 0.0;
};

/// Per-step breakdown. Per-rack spans point into the environment's state and
/// stay valid until the next step() or reset() on the same instance.
struct StepInfo {
    std::size_t step_index = 0;
    std::size_t trace_index = 0;
    std::int64_t timestamp = 0;
    double action_requested = 0.0;
    double crac_supply_c = 0.0;
    double ambient_c = 0.0;
    double carbon_intensity = 0.0;
    double workload = 0.0;
    double p_cpu_w = 0.0;
    double p_itfan_w = 0.0;
    double p_it_w = 0.0;
    double crac_return_c = 0.0;
    double p_cool_w = 0.0;
    bool cooling_clamped = false;
    double p_chiller_w = 0.0;
    double ct_delta_k = 0.0;
    double ct_airflow_m3s = 0.0;
    double p_hvac_w = 0.0;
    double it_energy_wh = 0.0;
    double hvac_energy_wh = 0.0;
    double energy_wh = 0.0;
    double carbon_kg = 0.0;
    double max_inlet_c = 0.0;
    double max_outlet_c = 0.0;

    std::span<const double> rack_inlet_c;
    std::span<const double> rack_outlet_c;
    std::span<const double> rack_cpu_w;
    std::span<const double> rack_fan_w;
    std::span<const double> rack_power_w;
    std::span<const double> rack_airflow_m3s;

    /// Stable scalar keys, in the column order used by the simulate CSV.
    static const std::vector<std::string_view>& scalar_keys();
    /// Values matching scalar_keys(); booleans are 0/1.
    std::vector<double> scalar_values() const;
};

struct EnvTransition {
    Observation observation;
    double reward = 0.0;
    bool terminated = false;
    bool truncated = false;
    StepInfo info;
};

struct BoxField {
    std::string name;
    double low;
    double high;
};

struct ObservationSpec {
    std::vector<BoxField> fields;
};

struct ActionSpec {
    std::string name = "crac_setpoint_c";
    double low = 0.0;
    double high = 0.0;
    std::size_t discrete_n = 0; // 0: continuous only
};

/// Episodic environment: the action is the CRAC supply setpoint, the reward is
/// the negative carbon-weighted energy of the step.
///
/// Instances share config and traces read-only and can run in parallel; a
/// single instance must not be stepped concurrently.
class Environment {
public:
    Environment(DCConfig cfg, std::shared_ptr<const TimeSeriesInputs> inputs,
                EnvOptions options = {});

    /// Rewinds to `start_index`, or to a seed-determined offset when unset.
    Observation reset(std::uint64_t seed, std::optional<std::size_t> start_index = std::nullopt);

    /// Advances one timestep. The action is clamped to the setpoint bounds.
    EnvTransition step(double action);

    /// Setpoint for discrete action `index` in [0, action_bins).
    double discrete_action(std::size_t index) const;

    ObservationSpec observation_spec() const;
    ActionSpec action_spec() const;

    const DCConfig& config() const noexcept { return cfg_; }
    const EnvOptions& options() const noexcept { return options_; }
    const TimeSeriesInputs& inputs() const noexcept { return *inputs_; }
    const SimState& state() const noexcept { return state_; }
    std::size_t episode_length() const noexcept { return episode_length_; }
    std::size_t step_index() const noexcept { return step_; }
    std::size_t start_index() const noexcept { return start_; }

private:
    Observation features(std::size_t trace_index) const;
    void distribute(std::size_t trace_index);

    DCConfig cfg_;
    std::shared_ptr<const TimeSeriesInputs> inputs_;
    EnvOptions options_;
    ItModel it_model_;
    WorkloadDistribution distribution_;
    std::size_t episode_length_ = 0;

    SimState state_;
    std::size_t start_ = 0;
    std::size_t step_ = 0;
    bool ready_ = false;
    double prev_setpoint_ = 0.0;
    double prev_return_ = 0.0;
    double prev_p_it_ = 0.0;
    double prev_p_hvac_ = 0.0;
};

std::size_t episode_steps(double days, double timestep_seconds);

} // namespace dcsim
