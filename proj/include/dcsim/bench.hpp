#pragma once

#include "dcsim/config.hpp"
#include "dcsim/timeseries.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dcsim::bench {

/// Monotonic time source in seconds. Tests inject fake clocks.
using Clock = std::function<double()>;

double steady_seconds();

struct Stats {
    double mean = 0.0;
    double std = 0.0; // sample standard deviation (n - 1)
    std::size_t repetitions = 0;
};

Stats summarize(std::span<const double> samples);

/// Elapsed clock time of one call to `fn`.
template <typename F>
double time_call(const Clock& clock, F&& fn)
{
    const double t0 = clock();
    fn();
    return clock() - t0;
}

/// Mean cost of timing an empty callee, in seconds.
double timer_overhead(const Clock& clock, std::size_t calls = 100000);

struct MethodRow {
    std::string name;
    Stats stats;
};

struct ScalingRow {
    std::size_t cpu_count = 0;
    double mean_step_seconds = 0.0;
};

struct BenchReport {
    std::string machine;
    std::size_t cpu_count = 0;
    std::vector<MethodRow> methods;  // init, reset, step
    std::vector<MethodRow> episodes; // e.g. "7 days", "30 days"
    std::vector<ScalingRow> scaling;
    std::optional<double> scaling_exponent; // log-log slope, needs >= 2 rows
    std::string error;                      // set when a sweep stopped early
};

struct MethodBenchOptions {
    std::size_t repetitions = 10;
    std::size_t warmup_steps = 100;
    std::size_t measured_steps = 1000;
    std::size_t resets_per_sample = 100;
    std::vector<double> episode_days{7.0, 30.0};
    Clock clock = steady_seconds;
};

/// Times construction, reset and step, plus whole episodes, over independent repetitions.
BenchReport bench_methods(const DCConfig& cfg, std::shared_ptr<const TimeSeriesInputs> inputs,
                          const MethodBenchOptions& options = {});

struct ScalingBenchOptions {
    std::size_t steps_per_point = 1000;
    std::size_t warmup_steps = 100;
    std::size_t trials = 3; // the fastest trial's mean is reported
    std::size_t cpus_per_rack = 40;
    Clock clock = steady_seconds;
};

/// `base` scaled to `cpu_count` CPUs: one row of racks with cpus_per_rack CPUs
/// each (the last rack takes the remainder), approach lists tiled from `base`,
/// per-CPU and per-rack curve overrides dropped.
DCConfig scaled_config(const DCConfig& base, std::size_t cpu_count, std::size_t cpus_per_rack = 40);

/// Mean step time per CPU count; stops early on allocation failure, keeping finished rows.
BenchReport bench_scaling(const DCConfig& base, std::shared_ptr<const TimeSeriesInputs> inputs,
                          std::span<const std::size_t> cpu_counts,
                          const ScalingBenchOptions& options = {});

/// Least-squares slope of log(time) against log(cpu_count).
std::optional<double> loglog_slope(std::span<const ScalingRow> rows);

std::string machine_descriptor();

std::string format_report(const BenchReport& report);
std::string report_json(const BenchReport& report);

} // namespace dcsim::bench
