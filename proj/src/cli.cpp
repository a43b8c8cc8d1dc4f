#include "dcsim/cli.hpp"

#include "dcsim/bench.hpp"
#include "dcsim/config.hpp"
#include "dcsim/env.hpp"
#include "dcsim/errors.hpp"
#include "dcsim/timeseries.hpp"

#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#ifdef __linux__
#include <sched.h>
#endif

#include <CLI11.hpp>

namespace dcsim::cli {

namespace fs = std::filesystem;

namespace {

struct TraceArgs {
    std::string weather;
    std::string ci;
    std::string workload;
    bool synthetic = false;
    std::uint64_t synthetic_seed = 0;
};

void add_trace_flags(CLI::App* cmd, TraceArgs& t)
{
    cmd->add_option("--weather", t.weather, "Dry-bulb temperature CSV (timestamp,value)");
    cmd->add_option("--ci", t.ci, "Carbon-intensity CSV (timestamp,value)");
    cmd->add_option("--workload", t.workload,
                    "Workload CSV (timestamp,value or timestamp,cpu_0,...)");
    cmd->add_flag("--synthetic", t.synthetic, "Use generated diurnal traces instead of files");
    cmd->add_option("--trace-seed", t.synthetic_seed, "Seed for --synthetic traces");
}

std::string resolve_relative(const std::string& path, const std::string& config_path)
{
    if (path.empty() || fs::path(path).is_absolute())
        return path;
    if (fs::exists(path))
        return path;
    return (fs::path(config_path).parent_path() / path).string();
}

std::shared_ptr<const TimeSeriesInputs> load_traces(const TraceArgs& t, const DCConfig& cfg,
                                                    const std::string& config_path,
                                                    std::size_t synthetic_steps)
{
    const auto timestep = static_cast<std::int64_t>(cfg.timestep_seconds);
    if (t.synthetic) {
        SyntheticSpec spec;
        spec.steps = synthetic_steps;
        spec.timestep_seconds = timestep;
        spec.seed = t.synthetic_seed;
        return std::make_shared<const TimeSeriesInputs>(synthetic_inputs(spec));
    }
    const std::string weather =
        !t.weather.empty() ? t.weather : resolve_relative(cfg.weather_path, config_path);
    const std::string ci = !t.ci.empty() ? t.ci : resolve_relative(cfg.ci_path, config_path);
    const std::string workload =
        !t.workload.empty() ? t.workload : resolve_relative(cfg.workload_path, config_path);
    if (weather.empty() || ci.empty() || workload.empty())
        throw SchemaError("WEATHER_PATH",
                          "traces missing: pass --weather/--ci/--workload, set WEATHER_PATH/"
                          "CI_PATH/WORKLOAD_PATH in the config, or use --synthetic");
    return std::make_shared<const TimeSeriesInputs>(
        load_inputs(weather, ci, workload, timestep));
}

DCConfig load_valid_config(const std::string& path)
{
    DCConfig cfg = load_config(path);
    require_valid(cfg);
    return cfg;
}

std::string fmt(double v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<std::size_t> parse_counts(const std::string& text)
{
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || ptr != item.data() + item.size() || v == 0)
            throw DomainError("bad CPU count '" + item + "' in --cpu-counts");
        out.push_back(v);
    }
    if (out.empty())
        throw DomainError("--cpu-counts is empty");
    return out;
}

void pin_to_current_core(std::ostream& err)
{
#ifdef __linux__
    const int core = sched_getcpu();
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(core < 0 ? 0 : core, &set);
    if (sched_setaffinity(0, sizeof set, &set) != 0)
        err << "warning: could not pin to a core\n";
#else
    err << "warning: --pin is only supported on Linux\n";
#endif
}

// ---------------------------------------------------------------- simulate

using Controller = std::function<double(const Observation&, std::int64_t timestamp,
                                        std::size_t step)>;

Controller schedule_controller(const std::string& spec)
{
    // "HOUR:SETPOINT,..." piecewise constant over the UTC hour of day.
    std::vector<std::pair<double, double>> table;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ',');) {
        auto colon = item.find(':');
        if (colon == std::string::npos)
            throw DomainError("schedule entry '" + item + "' is not HOUR:SETPOINT");
        double hour = 0.0, sp = 0.0;
        try {
            hour = std::stod(item.substr(0, colon));
            sp = std::stod(item.substr(colon + 1));
        } catch (const std::exception&) {
            throw DomainError("schedule entry '" + item + "' is not HOUR:SETPOINT");
        }
        if (hour < 0.0 || hour >= 24.0 || (!table.empty() && hour <= table.back().first))
            throw DomainError("schedule hours must be increasing within [0, 24)");
        table.emplace_back(hour, sp);
    }
    if (table.empty())
        throw DomainError("--schedule is empty");
    return [table](const Observation&, std::int64_t ts, std::size_t) {
        const double hour = static_cast<double>(((ts % 86400) + 86400) % 86400) / 3600.0;
        double sp = table.back().second;
        for (const auto& [h, v] : table) {
            if (h <= hour)
                sp = v;
        }
        return sp;
    };
}

Controller csv_controller(const std::string& path, std::size_t needed)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open actions file '" + path + "'");
    std::vector<double> actions;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line_no == 1 && line == "setpoint")
            continue;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc() || ptr != line.data() + line.size())
            throw ParseError(line_no, 1, path + ": '" + line + "' is not a setpoint");
        actions.push_back(v);
    }
    if (actions.size() < needed)
        throw DomainError("actions file has " + std::to_string(actions.size()) +
                          " rows, episode needs " + std::to_string(needed));
    return [actions = std::move(actions)](const Observation&, std::int64_t, std::size_t step) {
        return actions[step];
    };
}

struct EpisodeTotals {
    std::size_t steps = 0;
    double it_kwh = 0.0;
    double hvac_kwh = 0.0;
    double carbon_kg = 0.0;
    double reward = 0.0;
};

EpisodeTotals run_episode(Environment& env, const Controller& controller, std::uint64_t seed,
                          std::optional<std::size_t> start, std::ostream& csv, bool per_rack)
{
    const auto& keys = StepInfo::scalar_keys();
    const std::size_t racks = env.config().num_racks();
    csv << "step,timestamp";
    for (auto k : keys)
        csv << ',' << k;
    csv << ",reward";
    if (per_rack) {
        static constexpr const char* kRackFields[] = {"inlet_c", "outlet_c", "cpu_w",
                                                      "fan_w",   "power_w",  "airflow_m3s"};
        for (std::size_t i = 0; i < racks; ++i) {
            for (const char* f : kRackFields)
                csv << ",rack" << i << '_' << f;
        }
    }
    csv << '\n';

    EpisodeTotals totals;
    Observation obs = env.reset(seed, start);
    std::int64_t ts = env.inputs().timestamps[env.start_index()];
    bool done = false;
    while (!done) {
        const EnvTransition tr = env.step(controller(obs, ts, env.step_index()));
        const StepInfo& info = tr.info;
        csv << info.step_index << ',' << info.timestamp;
        for (double v : info.scalar_values())
            csv << ',' << fmt(v);
        csv << ',' << fmt(tr.reward);
        if (per_rack) {
            for (std::size_t i = 0; i < racks; ++i) {
                csv << ',' << fmt(info.rack_inlet_c[i]) << ',' << fmt(info.rack_outlet_c[i]) << ','
                    << fmt(info.rack_cpu_w[i]) << ',' << fmt(info.rack_fan_w[i]) << ','
                    << fmt(info.rack_power_w[i]) << ',' << fmt(info.rack_airflow_m3s[i]);
            }
        }
        csv << '\n';
        totals.steps += 1;
        totals.it_kwh += info.it_energy_wh / 1000.0;
        totals.hvac_kwh += info.hvac_energy_wh / 1000.0;
        totals.carbon_kg += info.carbon_kg;
        totals.reward += tr.reward;
        obs = tr.observation;
        const std::size_t next = std::min(info.trace_index + 1, env.inputs().size() - 1);
        ts = env.inputs().timestamps[next];
        done = tr.truncated || tr.terminated;
    }
    return totals;
}

std::string episode_path(const std::string& out, std::size_t k, std::size_t n)
{
    if (n == 1)
        return out;
    fs::path p(out);
    const std::string stem = p.stem().string() + "_ep" + std::to_string(k);
    return (p.parent_path() / (stem + p.extension().string())).string();
}

struct SimulateArgs {
    std::string config;
    TraceArgs traces;
    std::string out;
    double episode_days = 7.0;
    std::string controller = "fixed";
    double setpoint = 18.0;
    std::string schedule;
    std::string actions;
    std::optional<std::size_t> start;
    std::uint64_t seed = 0;
    bool random_start = false;
    std::size_t parallel = 1;
    bool per_rack = false;
    double w_energy = 0.0;
    double w_carbon = 1.0;
    double reward_scale = 1e3;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err)
{
    const DCConfig cfg = load_valid_config(a.config);
    EnvOptions opts;
    opts.episode_days = a.episode_days;
    opts.w_energy = a.w_energy;
    opts.w_carbon = a.w_carbon;
    opts.reward_scale = a.reward_scale;
    const std::size_t steps = episode_steps(a.episode_days, cfg.timestep_seconds);
    auto inputs = load_traces(a.traces, cfg, a.config, steps + 96);

    Controller controller;
    if (a.controller == "fixed") {
        const double sp = a.setpoint;
        controller = [sp](const Observation&, std::int64_t, std::size_t) { return sp; };
    } else if (a.controller == "schedule") {
        controller = schedule_controller(a.schedule);
    } else {
        if (a.actions.empty())
            throw DomainError("--controller csv needs --actions FILE");
        controller = csv_controller(a.actions, steps);
    }

    const std::size_t n = std::max<std::size_t>(a.parallel, 1);
    // Episodes start at trace row 0 unless --start is given, or --random-start
    // draws each start from its seed (seed + k for episode k).
    std::optional<std::size_t> start = a.start;
    if (!start && !a.random_start)
        start = 0;

    std::vector<EpisodeTotals> totals(n);
    std::vector<std::exception_ptr> errors(n);
    auto run_one = [&](std::size_t k) {
        try {
            Environment env(cfg, inputs, opts);
            const std::string path = episode_path(a.out, k, n);
            std::ofstream csv(path, std::ios::binary);
            if (!csv)
                throw IoError("cannot write '" + path + "'");
            totals[k] = run_episode(env, controller, a.seed + k, start, csv, a.per_rack);
            csv.flush();
            if (!csv)
                throw IoError("failed writing '" + path + "'");
        } catch (...) {
            errors[k] = std::current_exception();
        }
    };
    if (n == 1) {
        run_one(0);
    } else {
        std::vector<std::jthread> workers;
        for (std::size_t k = 0; k < n; ++k)
            workers.emplace_back(run_one, k);
    }
    for (auto& e : errors) {
        if (e)
            std::rethrow_exception(e);
    }

    for (std::size_t k = 0; k < n; ++k) {
        const auto& t = totals[k];
        if (n > 1)
            out << "episode " << k << " (" << episode_path(a.out, k, n) << "):\n";
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "steps: %zu\nIT energy: %.3f kWh\nHVAC energy: %.3f kWh\n"
                      "carbon: %.3f kgCO2\nreturn: %.6g\n",
                      t.steps, t.it_kwh, t.hvac_kwh, t.carbon_kg, t.reward);
        out << buf;
    }
    (void)err;
    return kOk;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err)
{
    DCConfig cfg = load_config(path);
    const auto violations = validate_config(cfg);
    if (violations.empty()) {
        out << "valid: " << cfg.num_racks() << " racks, " << cfg.num_cpus() << " CPUs\n";
        return kOk;
    }
    for (const auto& v : violations)
        err << v.field << ": " << v.message << '\n';
    err << violations.size() << " violation(s)\n";
    return kValidationFailure;
}

// ---------------------------------------------------------------- bench

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot write '" + path + "'");
    f << text;
    if (!f)
        throw IoError("failed writing '" + path + "'");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Data-center thermal and energy simulator", "dcsim"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run one episode and write a per-step CSV");
    simulate->add_option("--config", sim.config, "Data-center JSON config")->required();
    add_trace_flags(simulate, sim.traces);
    simulate->add_option("--out", sim.out, "Per-step CSV output path")->required();
    simulate->add_option("--episode-days", sim.episode_days, "Episode length in days")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--controller", sim.controller, "fixed | schedule | csv")
        ->check(CLI::IsMember({"fixed", "schedule", "csv"}));
    simulate->add_option("--setpoint", sim.setpoint, "Setpoint for the fixed controller (degC)");
    simulate->add_option("--schedule", sim.schedule, "HOUR:SETPOINT,... for the schedule controller");
    simulate->add_option("--actions", sim.actions, "One setpoint per line for the csv controller");
    simulate->add_option("--start", sim.start, "Trace row of the first step");
    simulate->add_option("--seed", sim.seed, "Reset seed");
    simulate->add_flag("--random-start", sim.random_start, "Draw the start row from the seed");
    simulate->add_option("--parallel", sim.parallel, "Run N episodes concurrently")
        ->check(CLI::PositiveNumber);
    simulate->add_flag("--per-rack", sim.per_rack, "Append per-rack columns");
    simulate->add_option("--w-energy", sim.w_energy, "Reward weight on energy");
    simulate->add_option("--w-carbon", sim.w_carbon, "Reward weight on carbon");
    simulate->add_option("--reward-scale", sim.reward_scale, "Reward divisor");

    std::string bench_config;
    TraceArgs bench_traces;
    std::size_t repetitions = 10;
    std::size_t measured_steps = 1000;
    std::size_t warmup = 100;
    std::string json_out;
    bool pin = false;
    auto* bench_methods = app.add_subcommand("bench-methods", "Time init, reset and step");
    bench_methods->add_option("--config", bench_config, "Data-center JSON config")->required();
    add_trace_flags(bench_methods, bench_traces);
    bench_methods->add_option("--repetitions", repetitions, "Independent repetitions (>= 10)")
        ->check(CLI::Range(std::size_t{10}, std::numeric_limits<std::size_t>::max()));
    bench_methods->add_option("--steps", measured_steps, "Measured steps per repetition")
        ->check(CLI::Range(std::size_t{1000}, std::numeric_limits<std::size_t>::max()));
    bench_methods->add_option("--warmup", warmup, "Discarded warm-up steps");
    bench_methods->add_option("--json", json_out, "Also write the report as JSON");
    bench_methods->add_flag("--pin", pin, "Pin to the current core");

    std::string counts_text = "1000,4000,10000,40000,100000";
    std::size_t steps_per_point = 1000;
    std::size_t trials = 3;
    std::string data_out;
    auto* bench_scaling = app.add_subcommand("bench-scaling", "Step time against CPU count");
    bench_scaling->add_option("--config", bench_config, "Base data-center JSON config")
        ->required();
    add_trace_flags(bench_scaling, bench_traces);
    bench_scaling->add_option("--cpu-counts", counts_text, "Comma-separated, increasing");
    bench_scaling->add_option("--steps", steps_per_point, "Measured steps per CPU count")
        ->check(CLI::PositiveNumber);
    bench_scaling->add_option("--trials", trials, "Trials per CPU count (fastest kept)")
        ->check(CLI::PositiveNumber);
    bench_scaling->add_option("--warmup", warmup, "Discarded warm-up steps");
    bench_scaling->add_option("--json", json_out, "Also write the report as JSON");
    bench_scaling->add_option("--data", data_out, "Write 'cpu_count mean_step_seconds' rows");
    bench_scaling->add_flag("--pin", pin, "Pin to the current core");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate-config", "Check a config for violations");
    validate->add_option("--config", validate_path, "Data-center JSON config")->required();

    std::string traces_dir;
    double trace_days = 31.0;
    SyntheticSpec synth;
    std::string trace_start;
    auto* make_traces = app.add_subcommand("make-traces", "Write synthetic trace CSVs");
    make_traces->add_option("--out-dir", traces_dir, "Output directory")->required();
    make_traces->add_option("--days", trace_days, "Trace length in days")
        ->check(CLI::PositiveNumber);
    make_traces->add_option("--seed", synth.seed, "Noise seed");
    make_traces->add_option("--timestep", synth.timestep_seconds, "Seconds between rows")
        ->check(CLI::PositiveNumber);
    make_traces->add_option("--start", trace_start, "First timestamp (ISO-8601 or epoch)");

    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidationFailure;
    }

    try {
        if (*simulate)
            return cmd_simulate(sim, out, err);

        if (*validate)
            return cmd_validate(validate_path, out, err);

        if (*make_traces) {
            if (!trace_start.empty()) {
                auto t = parse_timestamp(trace_start);
                if (!t)
                    throw DomainError("bad --start timestamp '" + trace_start + "'");
                synth.start = *t;
            }
            synth.steps = episode_steps(trace_days, static_cast<double>(synth.timestep_seconds));
            save_inputs(synthetic_inputs(synth), traces_dir);
            out << "wrote " << synth.steps << " rows to " << traces_dir
                << "/{weather,ci,workload}.csv\n";
            return kOk;
        }

        const DCConfig cfg = load_valid_config(bench_config);
        if (pin)
            pin_to_current_core(err);

        if (*bench_methods) {
            bench::MethodBenchOptions opt;
            opt.repetitions = repetitions;
            opt.measured_steps = measured_steps;
            opt.warmup_steps = warmup;
            const std::size_t need =
                std::max(episode_steps(30.0, cfg.timestep_seconds), warmup + measured_steps);
            auto inputs = load_traces(bench_traces, cfg, bench_config, need);
            const auto report = bench::bench_methods(cfg, inputs, opt);
            out << bench::format_report(report);
            if (!json_out.empty())
                write_text(json_out, bench::report_json(report));
            return kOk;
        }

        if (*bench_scaling) {
            bench::ScalingBenchOptions opt;
            opt.steps_per_point = steps_per_point;
            opt.warmup_steps = warmup;
            opt.trials = trials;
            const auto counts = parse_counts(counts_text);
            auto inputs = load_traces(bench_traces, cfg, bench_config,
                                      std::max<std::size_t>(warmup + steps_per_point, 96));
            const auto report = bench::bench_scaling(cfg, inputs, counts, opt);
            out << bench::format_report(report);
            if (!json_out.empty())
                write_text(json_out, bench::report_json(report));
            if (!data_out.empty()) {
                std::ostringstream data;
                data << "# cpu_count mean_step_seconds\n";
                for (const auto& r : report.scaling)
                    data << r.cpu_count << ' ' << fmt(r.mean_step_seconds) << '\n';
                write_text(data_out, data.str());
            }
            return report.error.empty() ? kOk : kIoFailure;
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kValidationFailure;
    }
    return kOk;
}

} // namespace dcsim::cli
