#include "dcsim/timeseries.hpp"

#include "dcsim/errors.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace dcsim {

std::string_view to_string(SeriesKind kind)
{
    switch (kind) {
    case SeriesKind::Weather:
        return "weather";
    case SeriesKind::CarbonIntensity:
        return "ci";
    case SeriesKind::Workload:
        return "workload";
    case SeriesKind::Battery:
        return "battery";
    }
    return "unknown";
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos)));
        if (comma == std::string_view::npos)
            break;
        pos = comma + 1;
    }
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s)
{
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        return std::nullopt;
    return value;
}

std::optional<int> fixed_digits(std::string_view s, std::size_t pos, std::size_t n)
{
    if (pos + n > s.size())
        return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (s[i] < '0' || s[i] > '9')
            return std::nullopt;
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

std::int64_t median_spacing(const std::vector<std::int64_t>& ts)
{
    if (ts.size() < 2)
        return 0;
    std::vector<std::int64_t> d(ts.size() - 1);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i)
        d[i] = ts[i + 1] - ts[i];
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid;
}

std::string format_time(std::int64_t t)
{
    using namespace std::chrono;
    const sys_seconds tp{seconds{t}};
    const auto day = floor<days>(tp);
    const year_month_day ymd{day};
    const hh_mm_ss hms{tp - day};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()), long(hms.hours().count()),
                  long(hms.minutes().count()), long(hms.seconds().count()));
    return buf;
}

void check_value(SeriesKind kind, double v, std::size_t row, std::size_t col,
                 const std::string& source)
{
    if (!std::isfinite(v))
        throw ParseError(row, col, source + ": value is not finite");
    switch (kind) {
    case SeriesKind::Workload:
    case SeriesKind::Battery:
        if (v < 0.0 || v > 1.0)
            throw RangeError(row, col,
                             source + ": " + std::string(to_string(kind)) + " value " +
                                 std::to_string(v) +
                                 " outside [0, 1]");
        break;
    case SeriesKind::CarbonIntensity:
        if (v < 0.0)
            throw RangeError(row, col, source + ": carbon intensity must be >= 0");
        break;
    case SeriesKind::Weather:
        break;
    }
}

bool interpolated(SeriesKind kind) { return kind != SeriesKind::Workload; }

// Exclusive upper bound of the time range a series can serve.
std::int64_t coverage_end(const RawSeries& s)
{
    if (interpolated(s.kind))
        return s.timestamps.back() + 1;
    return s.timestamps.back() + std::max<std::int64_t>(s.resolution, 1);
}

struct Sampler {
    const RawSeries& s;
    std::size_t cursor = 0;

    void check_gap(std::size_t k, std::int64_t t) const
    {
        const std::int64_t gap = s.timestamps[k + 1] - s.timestamps[k];
        if (gap > 2 * s.resolution) {
            throw GapError(std::string(to_string(s.kind)) + " series has a " +
                           std::to_string(gap) + " s gap after " + format_time(s.timestamps[k]) +
                           " (source resolution " + std::to_string(s.resolution) +
                           " s), needed for grid time " + format_time(t));
        }
    }

    // Fills out[c] for every column at time t. Grid times must be increasing.
    void sample(std::int64_t t, std::vector<double>& out)
    {
        const auto& ts = s.timestamps;
        while (cursor + 1 < ts.size() && ts[cursor + 1] <= t)
            ++cursor;
        const std::size_t k = cursor;
        if (ts[k] > t || t >= coverage_end(s))
            throw CoverageError(std::string(to_string(s.kind)) + " series does not cover " +
                                format_time(t));
        out.resize(s.values.size());
        if (ts[k] == t) {
            for (std::size_t c = 0; c < s.values.size(); ++c)
                out[c] = s.values[c][k];
            return;
        }
        if (k + 1 < ts.size())
            check_gap(k, t);
        if (!interpolated(s.kind)) {
            for (std::size_t c = 0; c < s.values.size(); ++c)
                out[c] = s.values[c][k];
            return;
        }
        const double frac = static_cast<double>(t - ts[k]) / static_cast<double>(ts[k + 1] - ts[k]);
        for (std::size_t c = 0; c < s.values.size(); ++c) {
            const double a = s.values[c][k];
            const double b = s.values[c][k + 1];
            out[c] = std::clamp(a + frac * (b - a), std::min(a, b), std::max(a, b));
        }
    }
};

void require_nonempty(const RawSeries& s)
{
    if (s.timestamps.empty())
        throw CoverageError(std::string(to_string(s.kind)) + " series is empty");
}

std::string format_double(double v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view text)
{
    text = trim(text);
    if (text.empty())
        return std::nullopt;
    if (auto epoch = parse_number<std::int64_t>(text))
        return epoch;

    // YYYY-MM-DD[T ]HH:MM[:SS][Z|+00:00]
    auto y = fixed_digits(text, 0, 4);
    auto mo = fixed_digits(text, 5, 2);
    auto d = fixed_digits(text, 8, 2);
    if (!y || !mo || !d || text.size() < 16 || text[4] != '-' || text[7] != '-' ||
        (text[10] != 'T' && text[10] != ' '))
        return std::nullopt;
    auto h = fixed_digits(text, 11, 2);
    auto mi = fixed_digits(text, 14, 2);
    if (!h || !mi || text[13] != ':')
        return std::nullopt;
    std::size_t pos = 16;
    int sec = 0;
    if (pos < text.size() && text[pos] == ':') {
        auto s = fixed_digits(text, pos + 1, 2);
        if (!s)
            return std::nullopt;
        sec = *s;
        pos += 3;
    }
    std::string_view zone = text.substr(pos);
    if (!(zone.empty() || zone == "Z" || zone == "+00:00" || zone == "+0000"))
        return std::nullopt;
    if (*h > 23 || *mi > 59 || sec > 60)
        return std::nullopt;

    using namespace std::chrono;
    const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)},
                             day{static_cast<unsigned>(*d)}};
    if (!ymd.ok())
        return std::nullopt;
    const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days_since_epoch) * 86400 + *h * 3600 + *mi * 60 + sec;
}

RawSeries parse_series(std::string_view csv_text, SeriesKind kind, const std::string& source)
{
    RawSeries out;
    out.kind = kind;
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t pos = 0;
    while (pos <= csv_text.size()) {
        auto nl = csv_text.find('\n', pos);
        std::string_view line = csv_text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? csv_text.size() + 1 : nl + 1;
        ++line_no;
        if (trim(line).empty())
            continue;
        auto cells = split_csv(line);
        if (!have_header) {
            if (cells.size() < 2 || cells[0] != "timestamp")
                throw ParseError(line_no, 1, source + ": header must start with 'timestamp' followed by "
                                             "at least one value column");
            if (kind != SeriesKind::Workload && cells.size() != 2)
                throw ParseError(line_no, 3, source + ": expected header 'timestamp,value'");
            for (std::size_t c = 1; c < cells.size(); ++c)
                out.columns.emplace_back(cells[c]);
            out.values.resize(out.columns.size());
            have_header = true;
            continue;
        }
        if (cells.size() != out.columns.size() + 1)
            throw ParseError(line_no, std::min(cells.size(), out.columns.size() + 1) + 1,
                             source + ": expected " + std::to_string(out.columns.size() + 1) +
                                 " cells, got " + std::to_string(cells.size()));
        auto ts = parse_timestamp(cells[0]);
        if (!ts)
            throw ParseError(line_no, 1, source + ": unrecognized timestamp '" + std::string(cells[0]) +
                                             "'");
        if (!out.timestamps.empty() && *ts <= out.timestamps.back())
            throw OrderError(line_no, source + ": " + (*ts == out.timestamps.back()
                                          ? "duplicate timestamp " + std::string(cells[0])
                                          : "timestamp " + std::string(cells[0]) +
                                                " is earlier than the previous row"));
        out.timestamps.push_back(*ts);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            auto v = parse_number<double>(cells[c]);
            if (!v)
                throw ParseError(line_no, c + 1,
                                 source + ": '" + std::string(cells[c]) + "' is not a number");
            check_value(kind, *v, line_no, c + 1, source);
            out.values[c - 1].push_back(*v);
        }
    }
    if (!have_header)
        throw ParseError(1, 1, source + ": missing header");
    out.resolution = median_spacing(out.timestamps);
    return out;
}

RawSeries load_series(const std::string& path, SeriesKind kind)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + std::string(to_string(kind)) + " file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_series(ss.str(), kind, path);
}

TimeSeriesInputs align(const RawInputs& raws, std::int64_t timestep_seconds,
                       const AlignPolicy& policy)
{
    if (timestep_seconds <= 0)
        throw DomainError("timestep must be > 0");
    std::vector<const RawSeries*> all{&raws.weather, &raws.carbon_intensity, &raws.workload};
    if (raws.battery)
        all.push_back(&*raws.battery);
    for (const auto* s : all)
        require_nonempty(*s);

    std::int64_t start = 0;
    std::int64_t end = 0; // exclusive
    for (std::size_t i = 0; i < all.size(); ++i) {
        const std::int64_t first = all[i]->timestamps.front();
        const std::int64_t last = coverage_end(*all[i]);
        start = i == 0 ? first : std::max(start, first);
        end = i == 0 ? last : std::min(end, last);
    }
    if (policy.start)
        start = *policy.start;

    std::size_t steps = 0;
    if (policy.steps) {
        steps = *policy.steps;
    } else {
        if (end <= start)
            throw CoverageError("input series do not overlap");
        steps = static_cast<std::size_t>((end - 1 - start) / timestep_seconds) + 1;
    }
    if (steps == 0)
        throw CoverageError("alignment window is empty");

    TimeSeriesInputs out;
    out.timestep_seconds = timestep_seconds;
    out.timestamps.resize(steps);
    out.ambient_c.resize(steps);
    out.carbon_intensity.resize(steps);
    out.workload.resize(steps);
    const std::size_t wcols = raws.workload.values.size();
    const bool per_cpu = wcols > 1;
    if (per_cpu) {
        out.per_cpu_columns = wcols;
        out.per_cpu_workload.resize(steps * wcols);
    }
    if (raws.battery)
        out.bat_soc.resize(steps);

    Sampler weather{raws.weather};
    Sampler ci{raws.carbon_intensity};
    Sampler work{raws.workload};
    std::optional<Sampler> battery;
    if (raws.battery)
        battery.emplace(Sampler{*raws.battery});
    std::vector<double> buf;
    for (std::size_t k = 0; k < steps; ++k) {
        const std::int64_t t = start + static_cast<std::int64_t>(k) * timestep_seconds;
        out.timestamps[k] = t;
        weather.sample(t, buf);
        out.ambient_c[k] = buf[0];
        ci.sample(t, buf);
        out.carbon_intensity[k] = buf[0];
        work.sample(t, buf);
        if (per_cpu) {
            double sum = 0.0;
            for (std::size_t c = 0; c < wcols; ++c) {
                out.per_cpu_workload[k * wcols + c] = buf[c];
                sum += buf[c];
            }
            out.workload[k] = sum / static_cast<double>(wcols);
        } else {
            out.workload[k] = buf[0];
        }
        if (battery) {
            battery->sample(t, buf);
            out.bat_soc[k] = buf[0];
        }
    }
    return out;
}

void write_series_csv(const std::string& path, const std::vector<std::int64_t>& timestamps,
                      const std::vector<std::string>& names,
                      const std::vector<const std::vector<double>*>& columns)
{
    if (names.size() != columns.size())
        throw LengthMismatch("CSV column names", columns.size(), names.size());
    for (const auto* col : columns) {
        if (col->size() != timestamps.size())
            throw LengthMismatch("CSV column", timestamps.size(), col->size());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path + "'");
    out << "timestamp";
    for (const auto& n : names)
        out << ',' << n;
    out << '\n';
    for (std::size_t r = 0; r < timestamps.size(); ++r) {
        out << timestamps[r];
        for (const auto* col : columns)
            out << ',' << format_double((*col)[r]);
        out << '\n';
    }
    if (!out)
        throw IoError("failed writing '" + path + "'");
}

void save_inputs(const TimeSeriesInputs& inputs, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    write_series_csv((base / "weather.csv").string(), inputs.timestamps, {"value"},
                     {&inputs.ambient_c});
    write_series_csv((base / "ci.csv").string(), inputs.timestamps, {"value"},
                     {&inputs.carbon_intensity});
    if (inputs.per_cpu_columns == 0) {
        write_series_csv((base / "workload.csv").string(), inputs.timestamps, {"value"},
                         {&inputs.workload});
        return;
    }
    const std::size_t n = inputs.per_cpu_columns;
    std::vector<std::vector<double>> cols(n, std::vector<double>(inputs.size()));
    std::vector<std::string> names;
    std::vector<const std::vector<double>*> ptrs;
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t r = 0; r < inputs.size(); ++r)
            cols[c][r] = inputs.per_cpu_workload[r * n + c];
        names.push_back("cpu_" + std::to_string(c));
        ptrs.push_back(&cols[c]);
    }
    write_series_csv((base / "workload.csv").string(), inputs.timestamps, names, ptrs);
}

TimeSeriesInputs load_inputs(const std::string& weather_path, const std::string& ci_path,
                             const std::string& workload_path, std::int64_t timestep_seconds,
                             const AlignPolicy& policy)
{
    RawInputs raws{load_series(weather_path, SeriesKind::Weather),
                   load_series(ci_path, SeriesKind::CarbonIntensity),
                   load_series(workload_path, SeriesKind::Workload), std::nullopt};
    return align(raws, timestep_seconds, policy);
}

TimeSeriesInputs synthetic_inputs(const SyntheticSpec& spec)
{
    TimeSeriesInputs out;
    out.timestep_seconds = spec.timestep_seconds;
    out.timestamps.resize(spec.steps);
    out.ambient_c.resize(spec.steps);
    out.carbon_intensity.resize(spec.steps);
    out.workload.resize(spec.steps);

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> noise(-1.0, 1.0);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t k = 0; k < spec.steps; ++k) {
        const std::int64_t t = spec.start + static_cast<std::int64_t>(k) * spec.timestep_seconds;
        const double hour = static_cast<double>(((t % 86400) + 86400) % 86400) / 3600.0;
        const double day = static_cast<double>(t / 86400);
        out.timestamps[k] = t;
        // Warmest mid-afternoon, slow seasonal drift.
        out.ambient_c[k] = spec.constant_ambient.value_or(
            18.0 + 7.0 * std::sin(two_pi * (hour - 9.0) / 24.0) +
            3.0 * std::sin(two_pi * day / 365.0) + 0.5 * noise(rng));
        // Solar dip around midday.
        out.carbon_intensity[k] =
            std::max(0.0, 0.42 - 0.12 * std::sin(two_pi * (hour - 6.0) / 24.0) +
                              0.02 * noise(rng));
        out.workload[k] = spec.constant_workload.value_or(std::clamp(
            0.55 + 0.25 * std::sin(two_pi * (hour - 8.0) / 24.0) + 0.05 * noise(rng), 0.05, 0.95));
    }
    return out;
}

} // namespace dcsim
