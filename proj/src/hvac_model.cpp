#include "dcsim/hvac_model.hpp"

#include "dcsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dcsim {

double rack_outlet_temp(double inlet, double rack_power_w, double c_air, double rho_air,
                        double rack_airflow)
{
    if (!(rack_airflow > 0.0))
        throw DomainError("rack airflow must be > 0 to compute the outlet temperature");
    if (rack_power_w < 0.0)
        throw DomainError("rack power must be >= 0");
    return inlet + rack_power_w / (c_air * rho_air * rack_airflow);
}

double crac_return_temp(std::span<const double> outlet_temps,
                        std::span<const double> return_approach)
{
    if (outlet_temps.size() != return_approach.size())
        throw LengthMismatch("return approach temperatures", outlet_temps.size(),
                             return_approach.size());
    if (outlet_temps.empty())
        throw EmptyInput("crac_return_temp needs at least one rack");
    double sum = 0.0;
    for (std::size_t i = 0; i < outlet_temps.size(); ++i)
        sum += return_approach[i] + outlet_temps[i];
    return sum / static_cast<double>(outlet_temps.size());
}

CoolingLoad crac_cooling_load(double m_flow, double c_air, double supply, double return_t)
{
    if (!(m_flow > 0.0))
        throw DomainError("CRAC fan mass flow must be > 0");
    const double raw = m_flow * c_air * (return_t - supply);
    return {std::max(raw, 0.0), raw < 0.0};
}

double chiller_power(double p_cool, double cop)
{
    if (!(cop > 0.0))
        throw DomainError("chiller COP must be > 0");
    if (p_cool < 0.0)
        throw DomainError("cooling load must be >= 0");
    return p_cool * (1.0 + 1.0 / cop);
}

double ct_delta(double ambient_drybulb, std::span<const CtDeltaPoint> table, double delta_min)
{
    if (table.empty())
        throw EmptyInput("cooling-tower delta table is empty");
    double delta;
    if (ambient_drybulb <= table.front().ambient_c) {
        delta = table.front().delta_k;
    } else if (ambient_drybulb >= table.back().ambient_c) {
        delta = table.back().delta_k;
    } else {
        auto hi = std::upper_bound(
            table.begin(), table.end(), ambient_drybulb,
            [](double t, const CtDeltaPoint& p) { return t < p.ambient_c; });
        auto lo = hi - 1;
        const double frac = (ambient_drybulb - lo->ambient_c) / (hi->ambient_c - lo->ambient_c);
        delta = lo->delta_k + frac * (hi->delta_k - lo->delta_k);
    }
    return std::max(delta, delta_min);
}

double ct_airflow(double p_chiller, double c_air, double rho_air, double delta, double delta_min)
{
    if (!(delta >= delta_min) || !(delta > 0.0))
        throw DomainError("cooling-tower delta " + std::to_string(delta) +
                          " K is below the floor " + std::to_string(delta_min) + " K");
    return p_chiller / (c_air * rho_air * delta);
}

double ct_power(double v_ct, double v_ref, double p_ref)
{
    if (!(v_ref > 0.0))
        throw DomainError("cooling-tower reference airflow must be > 0");
    if (v_ct < 0.0)
        throw DomainError("cooling-tower airflow must be >= 0");
    const double ratio = v_ct / v_ref;
    return p_ref * (ratio * ratio * ratio);
}

namespace {

void check_setpoint(const DCConfig& cfg, double supply_setpoint)
{
    if (!(supply_setpoint >= cfg.crac_setpoint_min && supply_setpoint <= cfg.crac_setpoint_max))
        throw DomainError("CRAC setpoint " + std::to_string(supply_setpoint) +
                          " outside configured bounds");
}

void finish_chain(const DCConfig& cfg, double supply_setpoint, double ambient_drybulb,
                  HVACResult& out)
{
    out.crac_return_temp = crac_return_temp(out.rack_outlet_temps, cfg.rack_return_approach_temps);
    const CoolingLoad load =
        crac_cooling_load(cfg.crac_fan_mass_flow, cfg.c_air, supply_setpoint, out.crac_return_temp);
    out.p_cool = load.watts;
    out.clamped_negative_cooling = load.clamped;
    out.p_chiller = chiller_power(out.p_cool, cfg.chiller_cop);
    out.ct_delta = ct_delta(ambient_drybulb, cfg.ct_delta_table, cfg.ct_delta_min);
    out.ct_airflow =
        ct_airflow(out.p_chiller, cfg.c_air, cfg.rho_air, out.ct_delta, cfg.ct_delta_min);
    out.p_hvac_cooling = ct_power(out.ct_airflow, cfg.ct_reference_airflow, cfg.ct_reference_power);
}

} // namespace

HVACResult hvac_step(const DCConfig& cfg, std::span<const RackThermalState> racks,
                     double supply_setpoint, double ambient_drybulb)
{
    if (racks.empty())
        throw EmptyInput("hvac_step needs at least one rack");
    check_setpoint(cfg, supply_setpoint);
    HVACResult out;
    out.rack_outlet_temps.reserve(racks.size());
    for (const auto& r : racks)
        out.rack_outlet_temps.push_back(
            rack_outlet_temp(r.inlet_temp, r.rack_power_w, cfg.c_air, cfg.rho_air, r.rack_airflow));
    finish_chain(cfg, supply_setpoint, ambient_drybulb, out);
    return out;
}

void hvac_step(const DCConfig& cfg, const ItState& it, double supply_setpoint,
               double ambient_drybulb, HVACResult& out)
{
    const std::size_t racks = it.rack_w.size();
    if (racks == 0)
        throw EmptyInput("hvac_step needs at least one rack");
    check_setpoint(cfg, supply_setpoint);
    out.rack_outlet_temps.resize(racks);
    const double heat_capacity = cfg.c_air * cfg.rho_air;
    for (std::size_t i = 0; i < racks; ++i) {
        const double v = it.airflow_m3s[i];
        if (!(v > 0.0))
            throw DomainError("rack " + std::to_string(i) + " has no airflow");
        out.rack_outlet_temps[i] = it.inlet_c[i] + it.rack_w[i] / (heat_capacity * v);
    }
    finish_chain(cfg, supply_setpoint, ambient_drybulb, out);
}

} // namespace dcsim
