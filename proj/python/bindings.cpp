#include "dcsim/bench.hpp"
#include "dcsim/config.hpp"
#include "dcsim/env.hpp"
#include "dcsim/errors.hpp"
#include "dcsim/hvac_model.hpp"
#include "dcsim/it_model.hpp"
#include "dcsim/timeseries.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace dcsim;

namespace {

py::list to_list(std::span<const double> xs)
{
    py::list out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        out[i] = xs[i];
    return out;
}

py::dict info_dict(const StepInfo& info)
{
    py::dict d;
    const auto& keys = StepInfo::scalar_keys();
    const auto values = info.scalar_values();
    for (std::size_t i = 0; i < keys.size(); ++i)
        d[py::str(std::string(keys[i]))] = values[i];
    d["cooling_clamped"] = info.cooling_clamped;
    d["step_index"] = info.step_index;
    d["trace_index"] = info.trace_index;
    d["timestamp"] = info.timestamp;
    d["rack_inlet_c"] = to_list(info.rack_inlet_c);
    d["rack_outlet_c"] = to_list(info.rack_outlet_c);
    d["rack_power_w"] = to_list(info.rack_power_w);
    d["rack_airflow_m3s"] = to_list(info.rack_airflow_m3s);
    return d;
}

py::dict stats_dict(const bench::Stats& s)
{
    py::dict d;
    d["mean"] = s.mean;
    d["std"] = s.std;
    d["repetitions"] = s.repetitions;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Data center cooling and IT power simulator";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", error.ptr());
    py::register_exception<SchemaError>(m, "SchemaError", error.ptr());
    py::register_exception<SyntaxError>(m, "ConfigSyntaxError", error.ptr());
    py::register_exception<DomainError>(m, "DomainError", error.ptr());
    py::register_exception<NotReset>(m, "NotReset", error.ptr());

    py::class_<PowerCurveParams>(m, "PowerCurveParams")
        .def(py::init<>())
        .def(py::init([](double idle, double full, double slope, double t_ref, double cap) {
                 return PowerCurveParams{idle, full, slope, t_ref, cap};
             }),
             py::arg("p_idle"), py::arg("p_full"), py::arg("temp_slope") = 0.0,
             py::arg("t_ref") = 25.0, py::arg("p_cap"))
        .def_readwrite("p_idle", &PowerCurveParams::p_idle)
        .def_readwrite("p_full", &PowerCurveParams::p_full)
        .def_readwrite("temp_slope", &PowerCurveParams::temp_slope)
        .def_readwrite("t_ref", &PowerCurveParams::t_ref)
        .def_readwrite("p_cap", &PowerCurveParams::p_cap);

    py::class_<DCConfig>(m, "DCConfig")
        .def_readonly("num_rows", &DCConfig::num_rows)
        .def_readonly("num_racks_per_row", &DCConfig::num_racks_per_row)
        .def_readonly("cpus_per_rack", &DCConfig::cpus_per_rack)
        .def_readonly("c_air", &DCConfig::c_air)
        .def_readonly("rho_air", &DCConfig::rho_air)
        .def_readonly("chiller_cop", &DCConfig::chiller_cop)
        .def_readonly("crac_setpoint_min", &DCConfig::crac_setpoint_min)
        .def_readonly("crac_setpoint_max", &DCConfig::crac_setpoint_max)
        .def_readonly("timestep_seconds", &DCConfig::timestep_seconds)
        .def_readonly("cpu_curve", &DCConfig::cpu_curve)
        .def_readonly("fan_curve", &DCConfig::fan_curve)
        .def_property_readonly("num_racks", &DCConfig::num_racks)
        .def_property_readonly("num_cpus", &DCConfig::num_cpus)
        .def("__eq__", [](const DCConfig& a, const DCConfig& b) { return a == b; });

    m.def("parse_config", &parse_config, py::arg("json_text"));
    m.def("load_config", &load_config, py::arg("path"));
    m.def("serialize_config", &serialize_config, py::arg("config"));
    m.def("validate_config",
          [](const DCConfig& cfg) {
              std::vector<std::pair<std::string, std::string>> out;
              for (const auto& v : validate_config(cfg))
                  out.emplace_back(v.field, v.message);
              return out;
          },
          py::arg("config"));

    m.def("cpu_power", &cpu_power, py::arg("curve"), py::arg("inlet_temp"), py::arg("load"));
    m.def("fan_power", &fan_power, py::arg("curve"), py::arg("inlet_temp"), py::arg("load"));
    m.def("rack_outlet_temp", &rack_outlet_temp, py::arg("inlet"), py::arg("rack_power_w"),
          py::arg("c_air"), py::arg("rho_air"), py::arg("rack_airflow"));
    m.def("chiller_power", &chiller_power, py::arg("p_cool"), py::arg("cop"));
    m.def("ct_power", &ct_power, py::arg("v_ct"), py::arg("v_ref"), py::arg("p_ref"));

    py::class_<TimeSeriesInputs, std::shared_ptr<TimeSeriesInputs>>(m, "TimeSeriesInputs")
        .def("__len__", &TimeSeriesInputs::size)
        .def_readonly("ambient_c", &TimeSeriesInputs::ambient_c)
        .def_readonly("carbon_intensity", &TimeSeriesInputs::carbon_intensity)
        .def_readonly("workload", &TimeSeriesInputs::workload);

    m.def(
        "load_inputs",
        [](const std::string& weather, const std::string& ci, const std::string& workload,
           std::int64_t timestep) {
            return std::make_shared<TimeSeriesInputs>(load_inputs(weather, ci, workload, timestep));
        },
        py::arg("weather"), py::arg("ci"), py::arg("workload"), py::arg("timestep_seconds") = 900);
    m.def(
        "synthetic_inputs",
        [](std::size_t steps, std::uint64_t seed) {
            SyntheticSpec spec;
            spec.steps = steps;
            spec.seed = seed;
            return std::make_shared<TimeSeriesInputs>(synthetic_inputs(spec));
        },
        py::arg("steps"), py::arg("seed") = 0);

    py::class_<Environment>(m, "Environment")
        .def(py::init([](const DCConfig& cfg, std::shared_ptr<TimeSeriesInputs> inputs,
                         double episode_days, double w_energy, double w_carbon,
                         double reward_scale, std::size_t action_bins) {
                 EnvOptions opt;
                 opt.episode_days = episode_days;
                 opt.w_energy = w_energy;
                 opt.w_carbon = w_carbon;
                 opt.reward_scale = reward_scale;
                 opt.action_bins = action_bins;
                 return std::make_unique<Environment>(cfg, std::move(inputs), opt);
             }),
             py::arg("config"), py::arg("inputs"), py::arg("episode_days") = 7.0,
             py::arg("w_energy") = 0.0, py::arg("w_carbon") = 1.0, py::arg("reward_scale") = 1e3,
             py::arg("action_bins") = 0)
        .def(
            "reset",
            [](Environment& env, std::uint64_t seed, std::optional<std::size_t> start) {
                Observation obs;
                {
                    py::gil_scoped_release release;
                    obs = env.reset(seed, start);
                }
                return obs.to_array();
            },
            py::arg("seed") = 0, py::arg("start_index") = py::none())
        .def(
            "step",
            [](Environment& env, double action) {
                EnvTransition t;
                {
                    py::gil_scoped_release release;
                    t = env.step(action);
                }
                return py::make_tuple(t.observation.to_array(), t.reward, t.terminated,
                                      t.truncated, info_dict(t.info));
            },
            py::arg("action"))
        .def("discrete_action", &Environment::discrete_action, py::arg("index"))
        .def_property_readonly("episode_length", &Environment::episode_length)
        .def_property_readonly("step_index", &Environment::step_index)
        .def_property_readonly("observation_names",
                               [](const Environment&) {
                                   std::vector<std::string> out;
                                   for (auto n : Observation::names())
                                       out.emplace_back(n);
                                   return out;
                               })
        .def_property_readonly("observation_bounds",
                               [](const Environment& env) {
                                   std::vector<std::pair<double, double>> out;
                                   for (const auto& f : env.observation_spec().fields)
                                       out.emplace_back(f.low, f.high);
                                   return out;
                               })
        .def_property_readonly("action_bounds", [](const Environment& env) {
            const auto a = env.action_spec();
            return std::make_pair(a.low, a.high);
        });

    m.def(
        "bench_methods",
        [](const DCConfig& cfg, std::shared_ptr<TimeSeriesInputs> inputs, std::size_t repetitions,
           std::size_t measured_steps) {
            bench::MethodBenchOptions opt;
            opt.repetitions = repetitions;
            opt.measured_steps = measured_steps;
            opt.episode_days = {};
            bench::BenchReport r;
            {
                py::gil_scoped_release release;
                r = bench::bench_methods(cfg, std::move(inputs), opt);
            }
            py::dict d;
            for (const auto& row : r.methods)
                d[py::str(row.name)] = stats_dict(row.stats);
            return d;
        },
        py::arg("config"), py::arg("inputs"), py::arg("repetitions") = 10,
        py::arg("measured_steps") = 1000);
}
