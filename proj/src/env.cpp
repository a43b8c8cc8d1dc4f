#include "dcsim/env.hpp"

#include "dcsim/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace dcsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct CalendarPhase {
    double hour_angle;
    double day_angle;
};

CalendarPhase calendar_phase(std::int64_t t)
{
    using namespace std::chrono;
    const sys_seconds tp{seconds{t}};
    const sys_days day = floor<days>(tp);
    const year_month_day ymd{day};
    const sys_days jan1{ymd.year() / January / 1};
    const double day_of_year = static_cast<double>((day - jan1).count());
    const double days_in_year = ymd.year().is_leap() ? 366.0 : 365.0;
    const double seconds_of_day = static_cast<double>((tp - day).count());
    return {kTwoPi * seconds_of_day / 86400.0, kTwoPi * day_of_year / days_in_year};
}

WorkloadDistribution resolve_distribution(const EnvOptions& opts, const TimeSeriesInputs& in,
                                          std::size_t num_cpus)
{
    WorkloadDistribution d = opts.distribution;
    if (d == WorkloadDistribution::Auto) {
        d = in.per_cpu_columns == num_cpus && num_cpus > 0 ? WorkloadDistribution::PerCpuTrace
                                                           : WorkloadDistribution::Uniform;
    }
    if (d == WorkloadDistribution::PerCpuTrace && in.per_cpu_columns != num_cpus)
        throw LengthMismatch("per-CPU workload columns", num_cpus, in.per_cpu_columns);
    if (d == WorkloadDistribution::Weighted) {
        if (opts.cpu_weights.size() != num_cpus)
            throw LengthMismatch("CPU workload weights", num_cpus, opts.cpu_weights.size());
        for (double w : opts.cpu_weights) {
            if (!(w >= 0.0) || !std::isfinite(w))
                throw DomainError("CPU workload weights must be finite and >= 0");
        }
    }
    return d;
}

} // namespace

std::size_t episode_steps(double days, double timestep_seconds)
{
    if (!(days > 0.0) || !(timestep_seconds > 0.0))
        throw DomainError("episode length and timestep must be > 0");
    return static_cast<std::size_t>(std::llround(days * 86400.0 / timestep_seconds));
}

std::array<double, Observation::kSize> Observation::to_array() const
{
    return {hour_sin,          hour_cos,          day_sin,
            day_cos,           workload,          ambient_c,
            carbon_intensity,  crac_setpoint_prev, crac_return_temp_prev,
            p_it_prev_w,       p_hvac_prev_w,     bat_soc};
}

const std::array<std::string_view, Observation::kSize>& Observation::names()
{
    static const std::array<std::string_view, kSize> n{
        "hour_sin",         "hour_cos",           "day_sin",
        "day_cos",          "workload",           "ambient_c",
        "carbon_intensity", "crac_setpoint_prev", "crac_return_temp_prev",
        "p_it_prev_w",      "p_hvac_prev_w",      "bat_soc"};
    return n;
}

const std::vector<std::string_view>& StepInfo::scalar_keys()
{
    static const std::vector<std::string_view> keys{
        "action_requested", "crac_supply_c", "ambient_c",      "carbon_intensity",
        "workload",         "p_cpu_w",       "p_itfan_w",      "p_it_w",
        "crac_return_c",    "p_cool_w",      "cooling_clamped", "p_chiller_w",
        "ct_delta_k",       "ct_airflow_m3s", "p_hvac_w",      "it_energy_wh",
        "hvac_energy_wh",   "energy_wh",     "carbon_kg",      "max_inlet_c",
        "max_outlet_c"};
    return keys;
}

std::vector<double> StepInfo::scalar_values() const
{
    return {action_requested, crac_supply_c, ambient_c,      carbon_intensity,
            workload,         p_cpu_w,       p_itfan_w,      p_it_w,
            crac_return_c,    p_cool_w,      cooling_clamped ? 1.0 : 0.0,
            p_chiller_w,      ct_delta_k,    ct_airflow_m3s, p_hvac_w,
            it_energy_wh,     hvac_energy_wh, energy_wh,     carbon_kg,
            max_inlet_c,      max_outlet_c};
}

Environment::Environment(DCConfig cfg, std::shared_ptr<const TimeSeriesInputs> inputs,
                         EnvOptions options)
    : cfg_(std::move(cfg)), inputs_(std::move(inputs)), options_(std::move(options)),
      it_model_(cfg_)
{
    if (!inputs_)
        throw DomainError("environment needs time-series inputs");
    const auto& in = *inputs_;
    if (static_cast<double>(in.timestep_seconds) != cfg_.timestep_seconds)
        throw DomainError("trace timestep " + std::to_string(in.timestep_seconds) +
                          " s does not match config timestep " +
                          std::to_string(cfg_.timestep_seconds) + " s");
    if (in.ambient_c.size() != in.size() || in.carbon_intensity.size() != in.size() ||
        in.workload.size() != in.size())
        throw LengthMismatch("time-series columns", in.size(), in.workload.size());
    if (!(options_.reward_scale > 0.0) || !(options_.w_energy >= 0.0) ||
        !(options_.w_carbon >= 0.0))
        throw DomainError("reward weights must be >= 0 and reward_scale > 0");
    if (options_.action_bins == 1)
        throw DomainError("action_bins must be 0 (continuous) or >= 2");

    episode_length_ = options_.episode_steps
                          ? *options_.episode_steps
                          : episode_steps(options_.episode_days, cfg_.timestep_seconds);
    if (episode_length_ == 0)
        throw DomainError("episode length must be >= 1 step");
    if (episode_length_ > in.size())
        throw IndexError("trace has " + std::to_string(in.size()) + " steps, episode needs " +
                         std::to_string(episode_length_));

    distribution_ = resolve_distribution(options_, in, it_model_.num_cpus());
    if (distribution_ == WorkloadDistribution::Uniform)
        state_.cpu_loads.clear();
    else
        state_.cpu_loads.assign(it_model_.num_cpus(), 0.0);
    state_.it.resize(it_model_.num_racks());
    state_.hvac.rack_outlet_temps.assign(it_model_.num_racks(), 0.0);
}

Observation Environment::features(std::size_t trace_index) const
{
    const auto& in = *inputs_;
    const CalendarPhase phase = calendar_phase(in.timestamps[trace_index]);
    Observation obs;
    obs.hour_sin = std::sin(phase.hour_angle);
    obs.hour_cos = std::cos(phase.hour_angle);
    obs.day_sin = std::sin(phase.day_angle);
    obs.day_cos = std::cos(phase.day_angle);
    obs.workload = in.workload[trace_index];
    obs.ambient_c = in.ambient_c[trace_index];
    obs.carbon_intensity = in.carbon_intensity[trace_index];
    obs.crac_setpoint_prev = prev_setpoint_;
    obs.crac_return_temp_prev = prev_return_;
    obs.p_it_prev_w = prev_p_it_;
    obs.p_hvac_prev_w = prev_p_hvac_;
    obs.bat_soc = in.bat_soc.empty() ? 1.0 : in.bat_soc[trace_index];
    return obs;
}

Observation Environment::reset(std::uint64_t seed, std::optional<std::size_t> start_index)
{
    const std::size_t last_start = inputs_->size() - episode_length_;
    if (start_index) {
        if (*start_index > last_start)
            throw IndexError("start index " + std::to_string(*start_index) +
                             " leaves fewer than " + std::to_string(episode_length_) +
                             " trace steps (last valid start " + std::to_string(last_start) +
                             ")");
        start_ = *start_index;
    } else {
        std::mt19937_64 rng(seed);
        start_ = static_cast<std::size_t>(rng() % (static_cast<std::uint64_t>(last_start) + 1));
    }
    step_ = 0;
    ready_ = true;
    prev_setpoint_ = std::clamp(
        options_.initial_setpoint.value_or(0.5 * (cfg_.crac_setpoint_min + cfg_.crac_setpoint_max)),
        cfg_.crac_setpoint_min, cfg_.crac_setpoint_max);
    prev_return_ = prev_setpoint_;
    prev_p_it_ = 0.0;
    prev_p_hvac_ = 0.0;
    return features(start_);
}

void Environment::distribute(std::size_t trace_index)
{
    const auto& in = *inputs_;
    auto& loads = state_.cpu_loads;
    switch (distribution_) {
    case WorkloadDistribution::PerCpuTrace: {
        const double* row = in.per_cpu_workload.data() + trace_index * in.per_cpu_columns;
        std::copy(row, row + loads.size(), loads.begin());
        break;
    }
    case WorkloadDistribution::Weighted: {
        const double b = in.workload[trace_index];
        for (std::size_t j = 0; j < loads.size(); ++j)
            loads[j] = std::min(1.0, b * options_.cpu_weights[j]);
        break;
    }
    default:
        state_.uniform_load = in.workload[trace_index];
        break;
    }
}

EnvTransition Environment::step(double action)
{
    if (!ready_)
        throw NotReset("step() called before reset()");
    if (step_ >= episode_length_)
        throw NotReset("episode finished; call reset()");
    if (std::isnan(action))
        throw DomainError("action is NaN");

    const auto& in = *inputs_;
    const std::size_t idx = start_ + step_;
    const double setpoint = std::clamp(action, cfg_.crac_setpoint_min, cfg_.crac_setpoint_max);
    const double ambient = in.ambient_c[idx];
    const double ci = in.carbon_intensity[idx];

    distribute(idx);
    if (distribution_ == WorkloadDistribution::Uniform)
        it_model_.evaluate_uniform(setpoint, state_.uniform_load, state_.it);
    else
        it_model_.evaluate(setpoint, state_.cpu_loads, state_.it);
    hvac_step(cfg_, state_.it, setpoint, ambient, state_.hvac);
    state_.supply_setpoint = setpoint;
    state_.ambient_c = ambient;

    const ItState& it = state_.it;
    const HVACResult& hv = state_.hvac;
    if (options_.check_energy_balance) {
        const double heat_capacity = cfg_.c_air * cfg_.rho_air;
        for (std::size_t i = 0; i < it.rack_w.size(); ++i) {
            const double carried =
                (hv.rack_outlet_temps[i] - it.inlet_c[i]) * heat_capacity * it.airflow_m3s[i];
            if (std::abs(carried - it.rack_w[i]) > 1e-9 * std::max(1.0, it.rack_w[i]))
                throw DomainError("energy balance violated at rack " + std::to_string(i));
        }
    }

    EnvTransition tr;
    StepInfo& info = tr.info;
    info.step_index = step_;
    info.trace_index = idx;
    info.timestamp = in.timestamps[idx];
    info.action_requested = action;
    info.crac_supply_c = setpoint;
    info.ambient_c = ambient;
    info.carbon_intensity = ci;
    info.workload = in.workload[idx];
    info.p_cpu_w = it.total_cpu_w;
    info.p_itfan_w = it.total_fan_w;
    info.p_it_w = it.total_w;
    info.crac_return_c = hv.crac_return_temp;
    info.p_cool_w = hv.p_cool;
    info.cooling_clamped = hv.clamped_negative_cooling;
    info.p_chiller_w = hv.p_chiller;
    info.ct_delta_k = hv.ct_delta;
    info.ct_airflow_m3s = hv.ct_airflow;
    info.p_hvac_w = hv.p_hvac_cooling;
    const double hours = cfg_.timestep_seconds / 3600.0;
    info.it_energy_wh = it.total_w * hours;
    info.hvac_energy_wh = hv.p_hvac_cooling * hours;
    info.energy_wh = (it.total_w + hv.p_hvac_cooling) * hours;
    info.carbon_kg = info.energy_wh / 1000.0 * ci;
    info.max_inlet_c = *std::max_element(it.inlet_c.begin(), it.inlet_c.end());
    info.max_outlet_c =
        *std::max_element(hv.rack_outlet_temps.begin(), hv.rack_outlet_temps.end());
    info.rack_inlet_c = it.inlet_c;
    info.rack_outlet_c = hv.rack_outlet_temps;
    info.rack_cpu_w = it.cpu_w;
    info.rack_fan_w = it.fan_w;
    info.rack_power_w = it.rack_w;
    info.rack_airflow_m3s = it.airflow_m3s;

    tr.reward =
        -(options_.w_energy + options_.w_carbon * ci) * info.energy_wh / options_.reward_scale;

    prev_setpoint_ = setpoint;
    prev_return_ = hv.crac_return_temp;
    prev_p_it_ = it.total_w;
    prev_p_hvac_ = hv.p_hvac_cooling;
    ++step_;
    tr.truncated = step_ == episode_length_;
    tr.observation = features(tr.truncated ? idx : idx + 1);
    return tr;
}

double Environment::discrete_action(std::size_t index) const
{
    if (options_.action_bins < 2)
        throw DomainError("discrete actions are disabled (action_bins < 2)");
    if (index >= options_.action_bins)
        throw IndexError("discrete action " + std::to_string(index) + " out of range");
    const double width = cfg_.crac_setpoint_max - cfg_.crac_setpoint_min;
    return cfg_.crac_setpoint_min +
           width * static_cast<double>(index) / static_cast<double>(options_.action_bins - 1);
}

ObservationSpec Environment::observation_spec() const
{
    const auto& n = Observation::names();
    auto s = [&](std::size_t i) { return std::string(n[i]); };
    ObservationSpec spec;
    spec.fields = {
        {s(0), -1.0, 1.0},
        {s(1), -1.0, 1.0},
        {s(2), -1.0, 1.0},
        {s(3), -1.0, 1.0},
        {s(4), 0.0, 1.0},
        {s(5), -kInf, kInf},
        {s(6), 0.0, kInf},
        {s(7), cfg_.crac_setpoint_min, cfg_.crac_setpoint_max},
        {s(8), -kInf, kInf},
        {s(9), 0.0, kInf},
        {s(10), 0.0, kInf},
        {s(11), 0.0, 1.0},
    };
    return spec;
}

ActionSpec Environment::action_spec() const
{
    ActionSpec spec;
    spec.low = cfg_.crac_setpoint_min;
    spec.high = cfg_.crac_setpoint_max;
    spec.discrete_n = options_.action_bins;
    return spec;
}

} // namespace dcsim
