#pragma once

#include "dcsim/config.hpp"
#include "dcsim/it_model.hpp"

#include <span>
#include <vector>

namespace dcsim {

/// Result of the HVAC chain for one time step: rack outlet -> CRAC return ->
/// cooling load -> chiller -> cooling-tower airflow -> cooling-tower power.
struct HVACResult {
    std::vector<double> rack_outlet_temps; // degC
    double crac_return_temp = 0.0;         // degC
    double p_cool = 0.0;                   // W
    double p_chiller = 0.0;                // W
    double ct_delta = 0.0;                 // K
    double ct_airflow = 0.0;               // m^3/s
    double p_hvac_cooling = 0.0;           // W
    bool clamped_negative_cooling = false;
};

struct CoolingLoad {
    double watts = 0.0;
    bool clamped = false; // return air was colder than supply air
};

/// inlet + rack_power_w / (c_air * rho_air * rack_airflow)
double rack_outlet_temp(double inlet, double rack_power_w, double c_air, double rho_air,
                        double rack_airflow);

/// Unweighted mean of (return_approach[i] + outlet_temps[i]).
double crac_return_temp(std::span<const double> outlet_temps,
                        std::span<const double> return_approach);

/// m_flow * c_air * (return - supply), clamped at zero with a flag.
CoolingLoad crac_cooling_load(double m_flow, double c_air, double supply, double return_t);

/// p_cool * (1 + 1/cop)
double chiller_power(double p_cool, double cop);

/// Piecewise-linear lookup with constant extrapolation, floored at delta_min.
double ct_delta(double ambient_drybulb, std::span<const CtDeltaPoint> table,
                double delta_min = 1.0);

/// p_chiller / (c_air * rho_air * delta); delta below delta_min is a DomainError.
double ct_airflow(double p_chiller, double c_air, double rho_air, double delta,
                  double delta_min = 1.0);

/// Cubic fan law: p_ref * (v_ct / v_ref)^3
double ct_power(double v_ct, double v_ref, double p_ref);

/// Full chain over per-rack IT results.
HVACResult hvac_step(const DCConfig& cfg, std::span<const RackThermalState> racks,
                     double supply_setpoint, double ambient_drybulb);

/// Same chain over the columnar ItState; reuses `out`'s buffers.
void hvac_step(const DCConfig& cfg, const ItState& it, double supply_setpoint,
               double ambient_drybulb, HVACResult& out);

} // namespace dcsim
