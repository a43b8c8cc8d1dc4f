#include "dcsim/bench.hpp"

#include "dcsim/env.hpp"
#include "dcsim/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <new>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace dcsim::bench {

double steady_seconds()
{
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

Stats summarize(std::span<const double> samples)
{
    Stats s;
    s.repetitions = samples.size();
    if (samples.empty())
        return s;
    // Welford: identical samples give exactly zero spread.
    double m2 = 0.0;
    std::size_t n = 0;
    for (double x : samples) {
        ++n;
        const double d = x - s.mean;
        s.mean += d / static_cast<double>(n);
        m2 += d * (x - s.mean);
    }
    if (n > 1)
        s.std = std::sqrt(m2 / static_cast<double>(n - 1));
    return s;
}

double timer_overhead(const Clock& clock, std::size_t calls)
{
    double total = 0.0;
    for (std::size_t i = 0; i < calls; ++i)
        total += time_call(clock, [] {});
    return total / static_cast<double>(calls);
}

namespace {

std::size_t required_trace_steps(const DCConfig& cfg, const MethodBenchOptions& opt)
{
    std::size_t need = opt.warmup_steps + opt.measured_steps;
    for (double days : opt.episode_days)
        need = std::max(need, episode_steps(days, cfg.timestep_seconds));
    return need;
}

} // namespace

BenchReport bench_methods(const DCConfig& cfg, std::shared_ptr<const TimeSeriesInputs> inputs,
                          const MethodBenchOptions& opt)
{
    if (opt.repetitions == 0)
        throw DomainError("repetitions must be >= 1");
    const std::size_t need = required_trace_steps(cfg, opt);
    if (inputs->size() < need)
        throw IndexError("benchmark needs a trace of at least " + std::to_string(need) +
                         " steps, got " + std::to_string(inputs->size()));

    BenchReport report;
    report.machine = machine_descriptor();
    report.cpu_count = cfg.num_cpus();
    const double setpoint = 0.5 * (cfg.crac_setpoint_min + cfg.crac_setpoint_max);

    EnvOptions step_opts;
    step_opts.episode_steps = inputs->size();

    std::vector<double> init_s, reset_s, step_s;
    for (std::size_t rep = 0; rep < opt.repetitions; ++rep) {
        std::optional<Environment> env;
        init_s.push_back(time_call(opt.clock, [&] { env.emplace(cfg, inputs, step_opts); }));

        const double resets = time_call(opt.clock, [&] {
            for (std::size_t k = 0; k < opt.resets_per_sample; ++k)
                env->reset(rep, 0);
        });
        reset_s.push_back(resets / static_cast<double>(std::max<std::size_t>(opt.resets_per_sample, 1)));

        env->reset(rep, 0);
        for (std::size_t k = 0; k < opt.warmup_steps; ++k)
            env->step(setpoint);
        const double steps = time_call(opt.clock, [&] {
            for (std::size_t k = 0; k < opt.measured_steps; ++k)
                env->step(setpoint);
        });
        step_s.push_back(steps / static_cast<double>(std::max<std::size_t>(opt.measured_steps, 1)));
    }
    report.methods = {{"init", summarize(init_s)},
                      {"reset", summarize(reset_s)},
                      {"step", summarize(step_s)}};

    for (double days : opt.episode_days) {
        EnvOptions ep_opts;
        ep_opts.episode_days = days;
        Environment env(cfg, inputs, ep_opts);
        env.reset(0, 0);
        for (std::size_t k = 0; k < std::min(opt.warmup_steps, env.episode_length()); ++k)
            env.step(setpoint);
        std::vector<double> totals;
        for (std::size_t rep = 0; rep < opt.repetitions; ++rep) {
            totals.push_back(time_call(opt.clock, [&] {
                env.reset(rep, 0);
                bool done = false;
                while (!done)
                    done = env.step(setpoint).truncated;
            }));
        }
        std::ostringstream name;
        name << days << " days";
        report.episodes.push_back({name.str(), summarize(totals)});
    }
    return report;
}

DCConfig scaled_config(const DCConfig& base, std::size_t cpu_count, std::size_t cpus_per_rack)
{
    if (cpu_count == 0 || cpus_per_rack == 0)
        throw DomainError("CPU count and CPUs per rack must be >= 1");
    DCConfig cfg = base;
    const std::size_t racks = (cpu_count + cpus_per_rack - 1) / cpus_per_rack;
    cfg.num_rows = 1;
    cfg.num_racks_per_row = racks;
    cfg.cpus_per_rack.assign(racks, cpus_per_rack);
    cfg.cpus_per_rack.back() = cpu_count - cpus_per_rack * (racks - 1);
    auto tile = [racks](const std::vector<double>& src) {
        std::vector<double> out(racks, 0.0);
        if (!src.empty()) {
            for (std::size_t i = 0; i < racks; ++i)
                out[i] = src[i % src.size()];
        }
        return out;
    };
    cfg.rack_supply_approach_temps = tile(base.rack_supply_approach_temps);
    cfg.rack_return_approach_temps = tile(base.rack_return_approach_temps);
    cfg.cpu_curve_overrides.clear();
    cfg.fan_curve_overrides.clear();
    return cfg;
}

BenchReport bench_scaling(const DCConfig& base, std::shared_ptr<const TimeSeriesInputs> inputs,
                          std::span<const std::size_t> cpu_counts, const ScalingBenchOptions& opt)
{
    for (std::size_t i = 1; i < cpu_counts.size(); ++i) {
        if (!(cpu_counts[i - 1] < cpu_counts[i]))
            throw DomainError("CPU counts must be strictly increasing");
    }
    if (opt.steps_per_point == 0 || opt.trials == 0)
        throw DomainError("steps per point and trials must be >= 1");

    BenchReport report;
    report.machine = machine_descriptor();
    const double setpoint = 0.5 * (base.crac_setpoint_min + base.crac_setpoint_max);
    EnvOptions env_opts;
    env_opts.episode_steps = inputs->size();

    for (std::size_t count : cpu_counts) {
        try {
            Environment env(scaled_config(base, count, opt.cpus_per_rack), inputs, env_opts);
            env.reset(0, 0);
            auto advance = [&] {
                if (env.step(setpoint).truncated)
                    env.reset(0, 0);
            };
            for (std::size_t k = 0; k < opt.warmup_steps; ++k)
                advance();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t trial = 0; trial < opt.trials; ++trial) {
                const double total = time_call(opt.clock, [&] {
                    for (std::size_t k = 0; k < opt.steps_per_point; ++k)
                        advance();
                });
                best = std::min(best, total / static_cast<double>(opt.steps_per_point));
            }
            report.scaling.push_back({count, best});
        } catch (const std::bad_alloc&) {
            report.error = "out of memory at " + std::to_string(count) + " CPUs";
            break;
        } catch (const std::length_error&) {
            report.error = "allocation too large at " + std::to_string(count) + " CPUs";
            break;
        }
    }
    report.scaling_exponent = loglog_slope(report.scaling);
    return report;
}

std::optional<double> loglog_slope(std::span<const ScalingRow> rows)
{
    if (rows.size() < 2)
        return std::nullopt;
    double sx = 0.0, sy = 0.0;
    for (const auto& r : rows) {
        sx += std::log(static_cast<double>(r.cpu_count));
        sy += std::log(r.mean_step_seconds);
    }
    const double n = static_cast<double>(rows.size());
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& r : rows) {
        const double dx = std::log(static_cast<double>(r.cpu_count)) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(r.mean_step_seconds) - my);
    }
    if (sxx == 0.0)
        return std::nullopt;
    return sxy / sxx;
}

std::string machine_descriptor()
{
    std::string model = "unknown CPU";
    std::ifstream cpuinfo("/proc/cpuinfo");
    for (std::string line; std::getline(cpuinfo, line);) {
        if (line.rfind("model name", 0) == 0) {
            auto colon = line.find(':');
            if (colon != std::string::npos)
                model = line.substr(colon + 2);
            break;
        }
    }
    std::ostringstream out;
    out << model << ", " << std::thread::hardware_concurrency() << " hardware threads, "
#if defined(__clang__)
        << "clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
        << "gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#else
        << "unknown compiler";
#endif
    return out.str();
}

namespace {

std::string human_time(double seconds)
{
    char buf[64];
    const double a = std::abs(seconds);
    if (a >= 1.0)
        std::snprintf(buf, sizeof buf, "%.3f s", seconds);
    else if (a >= 1e-3)
        std::snprintf(buf, sizeof buf, "%.3f ms", seconds * 1e3);
    else if (a >= 1e-6)
        std::snprintf(buf, sizeof buf, "%.3f us", seconds * 1e6);
    else
        std::snprintf(buf, sizeof buf, "%.1f ns", seconds * 1e9);
    return buf;
}

void stats_rows(std::ostringstream& out, const std::vector<MethodRow>& rows)
{
    for (const auto& r : rows) {
        char line[160];
        std::snprintf(line, sizeof line, "  %-10s %14s +/- %-14s (n=%zu)\n", r.name.c_str(),
                      human_time(r.stats.mean).c_str(), human_time(r.stats.std).c_str(),
                      r.stats.repetitions);
        out << line;
    }
}

} // namespace

std::string format_report(const BenchReport& report)
{
    std::ostringstream out;
    out << "machine: " << report.machine << '\n';
    if (!report.methods.empty()) {
        out << "methods (" << report.cpu_count << " CPUs, mean +/- std):\n";
        stats_rows(out, report.methods);
    }
    if (!report.episodes.empty()) {
        out << "episodes (reset + all steps):\n";
        stats_rows(out, report.episodes);
    }
    if (!report.scaling.empty()) {
        out << "# cpu_count mean_step_seconds\n";
        for (const auto& r : report.scaling) {
            char line[96];
            std::snprintf(line, sizeof line, "%zu %.9e\n", r.cpu_count, r.mean_step_seconds);
            out << line;
        }
        if (report.scaling_exponent)
            out << "log-log slope: " << *report.scaling_exponent << '\n';
    }
    if (!report.error.empty())
        out << "stopped early: " << report.error << '\n';
    return out.str();
}

std::string report_json(const BenchReport& report)
{
    using nlohmann::json;
    auto rows = [](const std::vector<MethodRow>& rs) {
        json arr = json::array();
        for (const auto& r : rs)
            arr.push_back({{"name", r.name},
                           {"mean_s", r.stats.mean},
                           {"std_s", r.stats.std},
                           {"repetitions", r.stats.repetitions}});
        return arr;
    };
    json doc;
    doc["machine"] = report.machine;
    doc["cpu_count"] = report.cpu_count;
    doc["methods"] = rows(report.methods);
    doc["episodes"] = rows(report.episodes);
    json scaling = json::array();
    for (const auto& r : report.scaling)
        scaling.push_back({{"cpu_count", r.cpu_count}, {"mean_step_s", r.mean_step_seconds}});
    doc["scaling"] = scaling;
    doc["scaling_exponent"] =
        report.scaling_exponent ? json(*report.scaling_exponent) : json(nullptr);
    if (!report.error.empty())
        doc["error"] = report.error;
    return doc.dump(2);
}

} // namespace dcsim::bench
