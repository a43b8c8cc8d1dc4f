#include "dcsim/config.hpp"

#include "dcsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dcsim {

using nlohmann::json;

namespace {

const std::set<std::string, std::less<>> kKnownKeys = {
    "NUM_ROWS",
    "NUM_RACKS_PER_ROW",
    "CPUS_PER_RACK",
    "RACK_SUPPLY_APPROACH_TEMP_LIST",
    "RACK_RETURN_APPROACH_TEMP_LIST",
    "C_AIR",
    "RHO_AIR",
    "CHILLER_COP",
    "CRAC_FAN_MASS_FLOW",
    "CRAC_SETPOINT_MIN",
    "CRAC_SETPOINT_MAX",
    "IT_FAN_AIRFLOW_RATIO_LB",
    "IT_FAN_AIRFLOW_RATIO_UB",
    "IT_FAN_NOMINAL_AIRFLOW",
    "IT_FAN_BLEND_T_REF",
    "IT_FAN_BLEND_T_HOT",
    "IT_FAN_MIN_AIRFLOW_RATIO",
    "CPU_POWER_CURVE",
    "IT_FAN_POWER_CURVE",
    "CPU_POWER_CURVE_OVERRIDES",
    "IT_FAN_POWER_CURVE_OVERRIDES",
    "CT_REFERENCE_AIRFLOW",
    "CT_REFERENCE_POWER",
    "CT_DELTA_TABLE",
    "CT_DELTA_MIN",
    "TIMESTEP_SECONDS",
    "WEATHER_PATH",
    "CI_PATH",
    "WORKLOAD_PATH",
};

const std::set<std::string, std::less<>> kCurveKeys = {"P_IDLE", "P_FULL", "TEMP_SLOPE", "T_REF",
                                                       "P_CAP"};

double as_number(const json& v, const std::string& key)
{
    if (!v.is_number())
        throw SchemaError(key, "expected a number");
    return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& key)
{
    if (v.is_number_unsigned())
        return v.get<std::size_t>();
    if (v.is_number_integer())
        throw SchemaError(key, "expected a non-negative integer");
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (d >= 0.0 && std::floor(d) == d)
            return static_cast<std::size_t>(d);
    }
    throw SchemaError(key, "expected a non-negative integer");
}

std::vector<double> as_number_list(const json& v, const std::string& key)
{
    if (!v.is_array())
        throw SchemaError(key, "expected a list of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(as_number(v[i], key + "[" + std::to_string(i) + "]"));
    return out;
}

std::array<double, 2> as_pair(const json& v, const std::string& key)
{
    auto list = as_number_list(v, key);
    if (list.size() != 2)
        throw SchemaError(key, "expected exactly two numbers, got " + std::to_string(list.size()));
    return {list[0], list[1]};
}

std::string as_string(const json& v, const std::string& key)
{
    if (!v.is_string())
        throw SchemaError(key, "expected a string");
    return v.get<std::string>();
}

const json& require(const json& obj, const char* key)
{
    auto it = obj.find(key);
    if (it == obj.end())
        throw SchemaError(key, "required key is missing");
    return *it;
}

// Curve fields absent from `v` keep the value from `base`.
PowerCurveParams parse_curve(const json& v, const std::string& key, PowerCurveParams base,
                             const std::set<std::string, std::less<>>& extra_keys = {})
{
    if (!v.is_object())
        throw SchemaError(key, "expected an object");
    for (const auto& [k, _] : v.items()) {
        if (!kCurveKeys.contains(k) && !extra_keys.contains(k))
            throw SchemaError(key + "." + k, "unknown key");
    }
    auto field = [&](const char* name, double& dst) {
        if (auto it = v.find(name); it != v.end())
            dst = as_number(*it, key + "." + name);
    };
    field("P_IDLE", base.p_idle);
    field("P_FULL", base.p_full);
    field("TEMP_SLOPE", base.temp_slope);
    field("T_REF", base.t_ref);
    field("P_CAP", base.p_cap);
    return base;
}

std::vector<CurveOverride> parse_overrides(const json& v, const std::string& key,
                                           const PowerCurveParams& base)
{
    if (!v.is_array())
        throw SchemaError(key, "expected a list of override objects");
    std::vector<CurveOverride> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string item_key = key + "[" + std::to_string(i) + "]";
        const json& item = v[i];
        if (!item.is_object())
            throw SchemaError(item_key, "expected an object");
        CurveOverride ov;
        auto rack = item.find("RACK");
        if (rack == item.end())
            throw SchemaError(item_key + ".RACK", "required key is missing");
        ov.rack = as_count(*rack, item_key + ".RACK");
        if (auto cpu = item.find("CPU"); cpu != item.end())
            ov.cpu = as_count(*cpu, item_key + ".CPU");
        ov.curve = parse_curve(item, item_key, base, {"RACK", "CPU"});
        out.push_back(ov);
    }
    return out;
}

json curve_to_json(const PowerCurveParams& c)
{
    return json{{"P_IDLE", c.p_idle},
                {"P_FULL", c.p_full},
                {"TEMP_SLOPE", c.temp_slope},
                {"T_REF", c.t_ref},
                {"P_CAP", c.p_cap}};
}

json overrides_to_json(const std::vector<CurveOverride>& ovs)
{
    json out = json::array();
    for (const auto& ov : ovs) {
        json item = curve_to_json(ov.curve);
        item["RACK"] = ov.rack;
        if (ov.cpu)
            item["CPU"] = *ov.cpu;
        out.push_back(std::move(item));
    }
    return out;
}

PowerCurveParams resolve_curve(const PowerCurveParams& fallback,
                               const std::vector<CurveOverride>& overrides, std::size_t rack,
                               std::size_t cpu)
{
    const PowerCurveParams* rack_level = nullptr;
    const PowerCurveParams* cpu_level = nullptr;
    for (const auto& ov : overrides) {
        if (ov.rack != rack)
            continue;
        if (!ov.cpu)
            rack_level = &ov.curve;
        else if (*ov.cpu == cpu)
            cpu_level = &ov.curve;
    }
    if (cpu_level)
        return *cpu_level;
    return rack_level ? *rack_level : fallback;
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

} // namespace

std::size_t DCConfig::num_cpus() const noexcept
{
    std::size_t total = 0;
    for (auto n : cpus_per_rack)
        total += n;
    return total;
}

PowerCurveParams DCConfig::cpu_curve_for(std::size_t rack, std::size_t cpu) const
{
    return resolve_curve(cpu_curve, cpu_curve_overrides, rack, cpu);
}

PowerCurveParams DCConfig::fan_curve_for(std::size_t rack, std::size_t cpu) const
{
    return resolve_curve(fan_curve, fan_curve_overrides, rack, cpu);
}

DCConfig parse_config(std::string_view json_text)
{
    json doc;
    try {
        doc = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw SyntaxError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw SyntaxError("config root must be a JSON object");

    DCConfig cfg;
    cfg.num_rows = as_count(require(doc, "NUM_ROWS"), "NUM_ROWS");
    cfg.num_racks_per_row = as_count(require(doc, "NUM_RACKS_PER_ROW"), "NUM_RACKS_PER_ROW");

    const json& cpus = require(doc, "CPUS_PER_RACK");
    if (cpus.is_array()) {
        for (std::size_t i = 0; i < cpus.size(); ++i)
            cfg.cpus_per_rack.push_back(
                as_count(cpus[i], "CPUS_PER_RACK[" + std::to_string(i) + "]"));
    } else {
        cfg.cpus_per_rack.assign(cfg.num_racks(), as_count(cpus, "CPUS_PER_RACK"));
    }

    cfg.rack_supply_approach_temps = as_number_list(
        require(doc, "RACK_SUPPLY_APPROACH_TEMP_LIST"), "RACK_SUPPLY_APPROACH_TEMP_LIST");
    cfg.rack_return_approach_temps = as_number_list(
        require(doc, "RACK_RETURN_APPROACH_TEMP_LIST"), "RACK_RETURN_APPROACH_TEMP_LIST");

    for (const auto& [k, _] : doc.items()) {
        if (!kKnownKeys.contains(k))
            throw SchemaError(k, "unknown key");
    }

    auto number = [&](const char* key, double& dst) {
        if (auto it = doc.find(key); it != doc.end())
            dst = as_number(*it, key);
    };
    auto string = [&](const char* key, std::string& dst) {
        if (auto it = doc.find(key); it != doc.end())
            dst = as_string(*it, key);
    };
    auto pair = [&](const char* key, std::array<double, 2>& dst) {
        if (auto it = doc.find(key); it != doc.end())
            dst = as_pair(*it, key);
    };

    number("C_AIR", cfg.c_air);
    number("RHO_AIR", cfg.rho_air);
    number("CHILLER_COP", cfg.chiller_cop);
    number("CRAC_FAN_MASS_FLOW", cfg.crac_fan_mass_flow);
    number("CRAC_SETPOINT_MIN", cfg.crac_setpoint_min);
    number("CRAC_SETPOINT_MAX", cfg.crac_setpoint_max);
    pair("IT_FAN_AIRFLOW_RATIO_LB", cfg.it_fan_airflow_ratio_lb);
    pair("IT_FAN_AIRFLOW_RATIO_UB", cfg.it_fan_airflow_ratio_ub);
    number("IT_FAN_NOMINAL_AIRFLOW", cfg.it_fan_nominal_airflow);
    number("IT_FAN_BLEND_T_REF", cfg.it_fan_blend_t_ref);
    number("IT_FAN_BLEND_T_HOT", cfg.it_fan_blend_t_hot);
    number("IT_FAN_MIN_AIRFLOW_RATIO", cfg.it_fan_min_airflow_ratio);

    if (auto it = doc.find("CPU_POWER_CURVE"); it != doc.end())
        cfg.cpu_curve = parse_curve(*it, "CPU_POWER_CURVE", cfg.cpu_curve);
    if (auto it = doc.find("IT_FAN_POWER_CURVE"); it != doc.end())
        cfg.fan_curve = parse_curve(*it, "IT_FAN_POWER_CURVE", cfg.fan_curve);
    if (auto it = doc.find("CPU_POWER_CURVE_OVERRIDES"); it != doc.end())
        cfg.cpu_curve_overrides = parse_overrides(*it, "CPU_POWER_CURVE_OVERRIDES", cfg.cpu_curve);
    if (auto it = doc.find("IT_FAN_POWER_CURVE_OVERRIDES"); it != doc.end())
        cfg.fan_curve_overrides =
            parse_overrides(*it, "IT_FAN_POWER_CURVE_OVERRIDES", cfg.fan_curve);

    number("CT_REFERENCE_AIRFLOW", cfg.ct_reference_airflow);
    number("CT_REFERENCE_POWER", cfg.ct_reference_power);
    if (auto it = doc.find("CT_DELTA_TABLE"); it != doc.end()) {
        if (!it->is_array())
            throw SchemaError("CT_DELTA_TABLE", "expected a list of [ambient, delta] pairs");
        cfg.ct_delta_table.clear();
        for (std::size_t i = 0; i < it->size(); ++i) {
            auto p = as_pair((*it)[i], "CT_DELTA_TABLE[" + std::to_string(i) + "]");
            cfg.ct_delta_table.push_back({p[0], p[1]});
        }
    }
    number("CT_DELTA_MIN", cfg.ct_delta_min);
    number("TIMESTEP_SECONDS", cfg.timestep_seconds);
    string("WEATHER_PATH", cfg.weather_path);
    string("CI_PATH", cfg.ci_path);
    string("WORKLOAD_PATH", cfg.workload_path);
    return cfg;
}

DCConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const DCConfig& cfg)
{
    json doc;
    doc["NUM_ROWS"] = cfg.num_rows;
    doc["NUM_RACKS_PER_ROW"] = cfg.num_racks_per_row;
    const bool uniform =
        cfg.cpus_per_rack.size() == cfg.num_racks() && !cfg.cpus_per_rack.empty() &&
        std::all_of(cfg.cpus_per_rack.begin(), cfg.cpus_per_rack.end(),
                    [&](std::size_t n) { return n == cfg.cpus_per_rack.front(); });
    if (uniform)
        doc["CPUS_PER_RACK"] = cfg.cpus_per_rack.front();
    else
        doc["CPUS_PER_RACK"] = cfg.cpus_per_rack;
    doc["RACK_SUPPLY_APPROACH_TEMP_LIST"] = cfg.rack_supply_approach_temps;
    doc["RACK_RETURN_APPROACH_TEMP_LIST"] = cfg.rack_return_approach_temps;
    doc["C_AIR"] = cfg.c_air;
    doc["RHO_AIR"] = cfg.rho_air;
    doc["CHILLER_COP"] = cfg.chiller_cop;
    doc["CRAC_FAN_MASS_FLOW"] = cfg.crac_fan_mass_flow;
    doc["CRAC_SETPOINT_MIN"] = cfg.crac_setpoint_min;
    doc["CRAC_SETPOINT_MAX"] = cfg.crac_setpoint_max;
    doc["IT_FAN_AIRFLOW_RATIO_LB"] = cfg.it_fan_airflow_ratio_lb;
    doc["IT_FAN_AIRFLOW_RATIO_UB"] = cfg.it_fan_airflow_ratio_ub;
    doc["IT_FAN_NOMINAL_AIRFLOW"] = cfg.it_fan_nominal_airflow;
    doc["IT_FAN_BLEND_T_REF"] = cfg.it_fan_blend_t_ref;
    doc["IT_FAN_BLEND_T_HOT"] = cfg.it_fan_blend_t_hot;
    doc["IT_FAN_MIN_AIRFLOW_RATIO"] = cfg.it_fan_min_airflow_ratio;
    doc["CPU_POWER_CURVE"] = curve_to_json(cfg.cpu_curve);
    doc["IT_FAN_POWER_CURVE"] = curve_to_json(cfg.fan_curve);
    if (!cfg.cpu_curve_overrides.empty())
        doc["CPU_POWER_CURVE_OVERRIDES"] = overrides_to_json(cfg.cpu_curve_overrides);
    if (!cfg.fan_curve_overrides.empty())
        doc["IT_FAN_POWER_CURVE_OVERRIDES"] = overrides_to_json(cfg.fan_curve_overrides);
    doc["CT_REFERENCE_AIRFLOW"] = cfg.ct_reference_airflow;
    doc["CT_REFERENCE_POWER"] = cfg.ct_reference_power;
    json table = json::array();
    for (const auto& p : cfg.ct_delta_table)
        table.push_back({p.ambient_c, p.delta_k});
    doc["CT_DELTA_TABLE"] = table;
    doc["CT_DELTA_MIN"] = cfg.ct_delta_min;
    doc["TIMESTEP_SECONDS"] = cfg.timestep_seconds;
    if (!cfg.weather_path.empty())
        doc["WEATHER_PATH"] = cfg.weather_path;
    if (!cfg.ci_path.empty())
        doc["CI_PATH"] = cfg.ci_path;
    if (!cfg.workload_path.empty())
        doc["WORKLOAD_PATH"] = cfg.workload_path;
    return doc.dump(2);
}

std::vector<Violation> validate_curve(const PowerCurveParams& c, const std::string& field)
{
    std::vector<Violation> out;
    const bool finite = std::isfinite(c.p_idle) && std::isfinite(c.p_full) &&
                        std::isfinite(c.temp_slope) && std::isfinite(c.t_ref) &&
                        std::isfinite(c.p_cap);
    if (!finite) {
        out.push_back({field, "all curve parameters must be finite"});
        return out;
    }
    if (!(0.0 <= c.p_idle && c.p_idle <= c.p_full && c.p_full <= c.p_cap))
        out.push_back({field, "requires 0 <= P_IDLE <= P_FULL <= P_CAP"});
    if (c.temp_slope < 0.0)
        out.push_back({field, "TEMP_SLOPE must be >= 0"});
    return out;
}

std::vector<Violation> validate_config(const DCConfig& cfg)
{
    std::vector<Violation> out;
    auto add = [&](std::string field, std::string msg) {
        out.push_back({std::move(field), std::move(msg)});
    };
    auto append = [&](std::vector<Violation> more) {
        out.insert(out.end(), more.begin(), more.end());
    };

    if (cfg.num_rows < 1)
        add("num_rows", "must be >= 1");
    if (cfg.num_racks_per_row < 1)
        add("num_racks_per_row", "must be >= 1");
    const std::size_t racks = cfg.num_racks();
    if (cfg.cpus_per_rack.size() != racks) {
        add("cpus_per_rack", "expected " + std::to_string(racks) + " entries, got " +
                                 std::to_string(cfg.cpus_per_rack.size()));
    }
    for (std::size_t i = 0; i < cfg.cpus_per_rack.size(); ++i) {
        if (cfg.cpus_per_rack[i] < 1)
            add("cpus_per_rack", "rack " + std::to_string(i) + " must hold >= 1 CPU");
    }

    auto check_approach = [&](const std::vector<double>& list, const char* field) {
        if (list.size() != racks) {
            add(field, "expected " + std::to_string(racks) + " entries (num_rows x " +
                           "num_racks_per_row), got " + std::to_string(list.size()));
        }
        for (double v : list) {
            if (!std::isfinite(v)) {
                add(field, "entries must be finite");
                break;
            }
        }
    };
    check_approach(cfg.rack_supply_approach_temps, "rack_supply_approach_temp_list");
    check_approach(cfg.rack_return_approach_temps, "rack_return_approach_temp_list");

    auto check_positive = [&](double v, const char* field) {
        if (!positive(v))
            add(field, "must be > 0");
    };
    check_positive(cfg.c_air, "c_air");
    check_positive(cfg.rho_air, "rho_air");
    check_positive(cfg.chiller_cop, "chiller_cop");
    check_positive(cfg.crac_fan_mass_flow, "crac_fan_mass_flow");
    check_positive(cfg.it_fan_nominal_airflow, "it_fan_nominal_airflow");
    check_positive(cfg.ct_reference_airflow, "ct_reference_airflow");
    check_positive(cfg.ct_reference_power, "ct_reference_power");
    check_positive(cfg.ct_delta_min, "ct_delta_min");
    check_positive(cfg.timestep_seconds, "timestep_seconds");

    if (!std::isfinite(cfg.crac_setpoint_min) || !std::isfinite(cfg.crac_setpoint_max) ||
        !(cfg.crac_setpoint_min < cfg.crac_setpoint_max))
        add("crac_setpoint_min", "requires crac_setpoint_min < crac_setpoint_max");

    const auto& lb = cfg.it_fan_airflow_ratio_lb;
    const auto& ub = cfg.it_fan_airflow_ratio_ub;
    for (std::size_t k = 0; k < 2; ++k) {
        if (!std::isfinite(lb[k]) || !std::isfinite(ub[k]) || lb[k] < 0.0) {
            add("it_fan_airflow_ratio_lb", "ratios must be finite and >= 0");
            break;
        }
        if (lb[k] > ub[k]) {
            add("it_fan_airflow_ratio_ub",
                "entry " + std::to_string(k) + " is below the matching lower-bound entry");
        }
    }
    if (!(cfg.it_fan_blend_t_ref < cfg.it_fan_blend_t_hot))
        add("it_fan_blend_t_ref", "requires it_fan_blend_t_ref < it_fan_blend_t_hot");
    if (!std::isfinite(cfg.it_fan_min_airflow_ratio) || cfg.it_fan_min_airflow_ratio < 0.0)
        add("it_fan_min_airflow_ratio", "must be finite and >= 0");

    append(validate_curve(cfg.cpu_curve, "cpu_curve"));
    append(validate_curve(cfg.fan_curve, "fan_curve"));
    auto check_overrides = [&](const std::vector<CurveOverride>& ovs, const std::string& field) {
        for (std::size_t i = 0; i < ovs.size(); ++i) {
            const std::string f = field + "[" + std::to_string(i) + "]";
            const auto& ov = ovs[i];
            if (ov.rack >= racks) {
                add(f, "rack index " + std::to_string(ov.rack) + " out of range");
            } else if (ov.cpu && ov.rack < cfg.cpus_per_rack.size() &&
                       *ov.cpu >= cfg.cpus_per_rack[ov.rack]) {
                add(f, "cpu index " + std::to_string(*ov.cpu) + " out of range");
            }
            append(validate_curve(ov.curve, f));
        }
    };
    check_overrides(cfg.cpu_curve_overrides, "cpu_curve_overrides");
    check_overrides(cfg.fan_curve_overrides, "fan_curve_overrides");

    if (cfg.ct_delta_table.empty())
        add("ct_delta_table", "needs at least one breakpoint");
    for (std::size_t i = 0; i < cfg.ct_delta_table.size(); ++i) {
        const auto& p = cfg.ct_delta_table[i];
        if (!std::isfinite(p.ambient_c) || !positive(p.delta_k))
            add("ct_delta_table", "breakpoint " + std::to_string(i) +
                                      " needs a finite ambient and a delta > 0");
        if (i > 0 && !(cfg.ct_delta_table[i - 1].ambient_c < p.ambient_c))
            add("ct_delta_table", "ambient values must be strictly increasing");
    }
    return out;
}

void require_valid(const DCConfig& cfg)
{
    auto violations = validate_config(cfg);
    if (violations.empty())
        return;
    std::string msg;
    for (const auto& v : violations) {
        if (!msg.empty())
            msg += "; ";
        msg += v.field + ": " + v.message;
    }
    throw SchemaError(violations.front().field, msg);
}

} // namespace dcsim
