#include "dcsim/it_model.hpp"

#include "dcsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dcsim {

namespace {

void check_load(double load)
{
    if (!(load >= 0.0 && load <= 1.0))
        throw DomainError("CPU load " + std::to_string(load) + " outside [0, 1]");
}

double curve_value(const PowerCurveParams& c, double inlet_temp, double load)
{
    check_load(load);
    const double p = c.p_idle + (c.p_full - c.p_idle) * load +
                     c.temp_slope * std::max(0.0, inlet_temp - c.t_ref);
    return std::clamp(p, 0.0, c.p_cap);
}

double blend_factor(double inlet_temp, double t_ref, double t_hot)
{
    return std::clamp((inlet_temp - t_ref) / (t_hot - t_ref), 0.0, 1.0);
}

} // namespace

std::vector<double> rack_inlet_temps(double supply_setpoint, std::span<const double> approach)
{
    std::vector<double> out(approach.size());
    rack_inlet_temps(supply_setpoint, approach, out);
    return out;
}

void rack_inlet_temps(double supply_setpoint, std::span<const double> approach,
                      std::span<double> out)
{
    if (out.size() != approach.size())
        throw LengthMismatch("rack_inlet_temps output", approach.size(), out.size());
    for (std::size_t i = 0; i < approach.size(); ++i)
        out[i] = approach[i] + supply_setpoint;
}

double cpu_power(const PowerCurveParams& curve, double inlet_temp, double load)
{
    return curve_value(curve, inlet_temp, load);
}

double fan_power(const PowerCurveParams& curve, double inlet_temp, double load)
{
    return curve_value(curve, inlet_temp, load);
}

double fan_airflow_ratio(double load, double inlet_temp, const std::array<double, 2>& lb,
                         const std::array<double, 2>& ub, double t_ref, double t_hot)
{
    check_load(load);
    if (!(t_ref < t_hot))
        throw DomainError("fan airflow blend requires t_ref < t_hot");
    if (std::isnan(inlet_temp))
        throw DomainError("inlet temperature is NaN");
    const double r_cool = lb[0] + (lb[1] - lb[0]) * load;
    const double r_hot = ub[0] + (ub[1] - ub[0]) * load;
    return r_cool + blend_factor(inlet_temp, t_ref, t_hot) * (r_hot - r_cool);
}

RackThermalState rack_power(const DCConfig& cfg, std::size_t rack_index, double inlet_temp,
                            std::span<const double> per_cpu_load)
{
    if (rack_index >= cfg.cpus_per_rack.size())
        throw DomainError("rack index " + std::to_string(rack_index) + " out of range");
    const std::size_t n = cfg.cpus_per_rack[rack_index];
    if (per_cpu_load.size() != n)
        throw LengthMismatch("rack " + std::to_string(rack_index) + " CPU loads", n,
                             per_cpu_load.size());

    RackThermalState st;
    st.inlet_temp = inlet_temp;
    st.per_cpu_load.assign(per_cpu_load.begin(), per_cpu_load.end());
    double ratio_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double load = per_cpu_load[j];
        st.cpu_power_w += cpu_power(cfg.cpu_curve_for(rack_index, j), inlet_temp, load);
        st.fan_power_w += fan_power(cfg.fan_curve_for(rack_index, j), inlet_temp, load);
        const double r = fan_airflow_ratio(load, inlet_temp, cfg.it_fan_airflow_ratio_lb,
                                           cfg.it_fan_airflow_ratio_ub, cfg.it_fan_blend_t_ref,
                                           cfg.it_fan_blend_t_hot);
        ratio_sum += std::max(r, cfg.it_fan_min_airflow_ratio);
    }
    st.rack_power_w = st.cpu_power_w + st.fan_power_w;
    st.rack_airflow = ratio_sum * cfg.it_fan_nominal_airflow;
    return st;
}

double datacenter_it_power(std::span<const RackThermalState> racks)
{
    if (racks.empty())
        throw EmptyInput("datacenter_it_power needs at least one rack");
    double total = 0.0;
    for (const auto& r : racks)
        total += r.rack_power_w;
    return total;
}

void ItState::resize(std::size_t racks)
{
    inlet_c.resize(racks);
    cpu_w.resize(racks);
    fan_w.resize(racks);
    rack_w.resize(racks);
    airflow_m3s.resize(racks);
}

void ItModel::CurveColumns::push(const Curve& c)
{
    idle.push_back(c.idle);
    span.push_back(c.span);
    slope.push_back(c.slope);
    t_ref.push_back(c.t_ref);
    cap.push_back(c.cap);
}

ItModel::ItModel(const DCConfig& cfg)
{
    require_valid(cfg);
    const std::size_t racks = cfg.num_racks();
    auto flat = [](const PowerCurveParams& p) {
        return Curve{p.p_idle, p.p_full - p.p_idle, p.temp_slope, p.t_ref, p.p_cap};
    };

    rack_offsets_.reserve(racks + 1);
    rack_offsets_.push_back(0);
    for (std::size_t i = 0; i < racks; ++i)
        rack_offsets_.push_back(rack_offsets_.back() + cfg.cpus_per_rack[i]);
    supply_approach_ = cfg.rack_supply_approach_temps;

    rack_cpu_curve_.resize(racks);
    rack_fan_curve_.resize(racks);
    rack_uniform_.assign(racks, 1);
    for (const auto& ov : cfg.cpu_curve_overrides) {
        if (ov.cpu)
            rack_uniform_[ov.rack] = 0;
    }
    for (const auto& ov : cfg.fan_curve_overrides) {
        if (ov.cpu)
            rack_uniform_[ov.rack] = 0;
    }
    const bool any_mixed = std::find(rack_uniform_.begin(), rack_uniform_.end(), 0) !=
                           rack_uniform_.end();
    for (std::size_t i = 0; i < racks; ++i) {
        rack_cpu_curve_[i] = flat(cfg.cpu_curve_for(i, 0));
        rack_fan_curve_[i] = flat(cfg.fan_curve_for(i, 0));
        if (!any_mixed)
            continue;
        for (std::size_t j = 0; j < cfg.cpus_per_rack[i]; ++j) {
            cpu_cols_.push(flat(cfg.cpu_curve_for(i, j)));
            fan_cols_.push(flat(cfg.fan_curve_for(i, j)));
        }
    }

    const auto& lb = cfg.it_fan_airflow_ratio_lb;
    const auto& ub = cfg.it_fan_airflow_ratio_ub;
    lb0_ = lb[0];
    lb_slope_ = lb[1] - lb[0];
    ub0_ = ub[0];
    ub_slope_ = ub[1] - ub[0];
    blend_t_ref_ = cfg.it_fan_blend_t_ref;
    blend_width_ = cfg.it_fan_blend_t_hot - cfg.it_fan_blend_t_ref;
    min_ratio_ = cfg.it_fan_min_airflow_ratio;
    nominal_airflow_ = cfg.it_fan_nominal_airflow;
}

void ItModel::evaluate(double supply_setpoint, std::span<const double> cpu_loads,
                       ItState& out) const
{
    const std::size_t racks = num_racks();
    if (cpu_loads.size() != num_cpus())
        throw LengthMismatch("per-CPU loads", num_cpus(), cpu_loads.size());
    out.resize(racks);

    const double* load = cpu_loads.data();
    double total_cpu = 0.0;
    double total_fan = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < racks; ++i) {
        const double inlet = supply_approach_[i] + supply_setpoint;
        const double blend =
            std::clamp((inlet - blend_t_ref_) / blend_width_, 0.0, 1.0);
        const std::size_t begin = rack_offsets_[i];
        const std::size_t end = rack_offsets_[i + 1];

        double cpu_sum = 0.0;
        double fan_sum = 0.0;
        double ratio_sum = 0.0;
        if (rack_uniform_[i]) {
            const Curve& c = rack_cpu_curve_[i];
            const Curve& f = rack_fan_curve_[i];
            const double c_temp = c.slope * std::max(0.0, inlet - c.t_ref);
            const double f_temp = f.slope * std::max(0.0, inlet - f.t_ref);
            for (std::size_t j = begin; j < end; ++j) {
                const double l = load[j];
                cpu_sum += std::clamp(c.idle + c.span * l + c_temp, 0.0, c.cap);
                fan_sum += std::clamp(f.idle + f.span * l + f_temp, 0.0, f.cap);
                const double r_cool = lb0_ + lb_slope_ * l;
                const double r_hot = ub0_ + ub_slope_ * l;
                ratio_sum += std::max(r_cool + blend * (r_hot - r_cool), min_ratio_);
            }
        } else {
            const CurveColumns& cc = cpu_cols_;
            const CurveColumns& fc = fan_cols_;
            for (std::size_t j = begin; j < end; ++j) {
                const double l = load[j];
                cpu_sum += std::clamp(cc.idle[j] + cc.span[j] * l +
                                          cc.slope[j] * std::max(0.0, inlet - cc.t_ref[j]),
                                      0.0, cc.cap[j]);
                fan_sum += std::clamp(fc.idle[j] + fc.span[j] * l +
                                          fc.slope[j] * std::max(0.0, inlet - fc.t_ref[j]),
                                      0.0, fc.cap[j]);
                const double r_cool = lb0_ + lb_slope_ * l;
                const double r_hot = ub0_ + ub_slope_ * l;
                ratio_sum += std::max(r_cool + blend * (r_hot - r_cool), min_ratio_);
            }
        }
        const double rack_w = cpu_sum + fan_sum;
        out.inlet_c[i] = inlet;
        out.cpu_w[i] = cpu_sum;
        out.fan_w[i] = fan_sum;
        out.rack_w[i] = rack_w;
        out.airflow_m3s[i] = ratio_sum * nominal_airflow_;
        total_cpu += cpu_sum;
        total_fan += fan_sum;
        total += rack_w;
    }
    out.total_cpu_w = total_cpu;
    out.total_fan_w = total_fan;
    out.total_w = total;
}

void ItModel::evaluate_uniform(double supply_setpoint, double load, ItState& out) const
{
    const std::size_t racks = num_racks();
    out.resize(racks);

    const double r_cool = lb0_ + lb_slope_ * load;
    const double r_hot = ub0_ + ub_slope_ * load;
    double total_cpu = 0.0;
    double total_fan = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < racks; ++i) {
        const double inlet = supply_approach_[i] + supply_setpoint;
        const double blend =
            std::clamp((inlet - blend_t_ref_) / blend_width_, 0.0, 1.0);
        const std::size_t begin = rack_offsets_[i];
        const std::size_t end = rack_offsets_[i + 1];
        const auto n = static_cast<double>(end - begin);
        const double ratio = std::max(r_cool + blend * (r_hot - r_cool), min_ratio_);

        double cpu_sum = 0.0;
        double fan_sum = 0.0;
        if (rack_uniform_[i]) {
            const Curve& c = rack_cpu_curve_[i];
            const Curve& f = rack_fan_curve_[i];
            cpu_sum = n * std::clamp(c.idle + c.span * load + c.slope * std::max(0.0, inlet - c.t_ref),
                                     0.0, c.cap);
            fan_sum = n * std::clamp(f.idle + f.span * load + f.slope * std::max(0.0, inlet - f.t_ref),
                                     0.0, f.cap);
        } else {
            const CurveColumns& cc = cpu_cols_;
            const CurveColumns& fc = fan_cols_;
            for (std::size_t j = begin; j < end; ++j) {
                cpu_sum += std::clamp(cc.idle[j] + cc.span[j] * load +
                                          cc.slope[j] * std::max(0.0, inlet - cc.t_ref[j]),
                                      0.0, cc.cap[j]);
                fan_sum += std::clamp(fc.idle[j] + fc.span[j] * load +
                                          fc.slope[j] * std::max(0.0, inlet - fc.t_ref[j]),
                                      0.0, fc.cap[j]);
            }
        }
        const double rack_w = cpu_sum + fan_sum;
        out.inlet_c[i] = inlet;
        out.cpu_w[i] = cpu_sum;
        out.fan_w[i] = fan_sum;
        out.rack_w[i] = rack_w;
        out.airflow_m3s[i] = n * ratio * nominal_airflow_;
        total_cpu += cpu_sum;
        total_fan += fan_sum;
        total += rack_w;
    }
    out.total_cpu_w = total_cpu;
    out.total_fan_w = total_fan;
    out.total_w = total;
}

} // namespace dcsim
