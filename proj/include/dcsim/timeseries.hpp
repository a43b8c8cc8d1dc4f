#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dcsim {

enum class SeriesKind { Weather, CarbonIntensity, Workload, Battery };

std::string_view to_string(SeriesKind kind);

/// A series as read from disk, at its source resolution.
struct RawSeries {
    SeriesKind kind = SeriesKind::Weather;
    std::vector<std::int64_t> timestamps;   // UTC epoch seconds, strictly increasing
    std::vector<std::string> columns;       // value column names (header minus "timestamp")
    std::vector<std::vector<double>> values; // one vector per column
    std::int64_t resolution = 0;            // median sample spacing, seconds

    std::size_t size() const noexcept { return timestamps.size(); }
};

/// Weather, carbon intensity and workload on one uniform simulation grid.
struct TimeSeriesInputs {
    std::int64_t timestep_seconds = 900;
    std::vector<std::int64_t> timestamps;
    std::vector<double> ambient_c;        // dry-bulb, degC
    std::vector<double> carbon_intensity; // kgCO2/kWh
    std::vector<double> workload;         // aggregate utilization in [0, 1]
    /// Optional per-CPU utilization, row-major (step x per_cpu_columns).
    std::vector<double> per_cpu_workload;
    std::size_t per_cpu_columns = 0;
    std::vector<double> bat_soc; // empty: battery state of charge is a constant 1.0

    std::size_t size() const noexcept { return timestamps.size(); }
    bool operator==(const TimeSeriesInputs&) const = default;
};

/// Accepts epoch seconds ("1672531200") or ISO-8601 UTC
/// ("2023-01-01T00:15:00Z", "2023-01-01 00:15", optional "+00:00").
std::optional<std::int64_t> parse_timestamp(std::string_view text);

/// Parses CSV text with header `timestamp,value`, or `timestamp,cpu_0,...,cpu_N`
/// for per-CPU workload. `source` names the input in error messages.
RawSeries parse_series(std::string_view csv_text, SeriesKind kind,
                       const std::string& source = "<memory>");

/// Reads and parses a CSV file; IoError if unreadable.
RawSeries load_series(const std::string& path, SeriesKind kind);

struct AlignPolicy {
    std::optional<std::int64_t> start; // default: latest first sample across series
    std::optional<std::size_t> steps;  // default: every step covered by all series
};

struct RawInputs {
    RawSeries weather;
    RawSeries carbon_intensity;
    RawSeries workload;
    std::optional<RawSeries> battery;
};

/// Resamples onto the grid start + k * timestep_seconds. Weather, carbon intensity
/// and battery use linear interpolation; workload is held from the previous sample.
/// Source gaps wider than twice the source resolution inside the window raise GapError.
TimeSeriesInputs align(const RawInputs& raws, std::int64_t timestep_seconds,
                       const AlignPolicy& policy = {});

/// Writes `timestamp,<names...>` CSV with shortest round-trip number formatting.
void write_series_csv(const std::string& path, const std::vector<std::int64_t>& timestamps,
                      const std::vector<std::string>& names,
                      const std::vector<const std::vector<double>*>& columns);

/// Writes weather.csv, ci.csv and workload.csv into `dir` (created if needed).
void save_inputs(const TimeSeriesInputs& inputs, const std::string& dir);

/// Loads the three CSVs written by save_inputs() and aligns them.
TimeSeriesInputs load_inputs(const std::string& weather_path, const std::string& ci_path,
                             const std::string& workload_path, std::int64_t timestep_seconds,
                             const AlignPolicy& policy = {});

struct SyntheticSpec {
    std::size_t steps = 96 * 31;
    std::int64_t timestep_seconds = 900;
    std::int64_t start = 1672531200; // 2023-01-01T00:00:00Z
    std::uint64_t seed = 0;
    std::optional<double> constant_workload;
    std::optional<double> constant_ambient;
};

/// Diurnal weather, carbon-intensity and workload traces for benchmarks and tests.
TimeSeriesInputs synthetic_inputs(const SyntheticSpec& spec);

} // namespace dcsim
