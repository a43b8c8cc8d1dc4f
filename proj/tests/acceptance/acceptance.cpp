// Acceptance gate: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include "dcsim/bench.hpp"
#include "dcsim/cli.hpp"
#include "dcsim/config.hpp"
#include "dcsim/env.hpp"
#include "dcsim/hvac_model.hpp"
#include "dcsim/it_model.hpp"
#include "dcsim/timeseries.hpp"
#include "oracle/reference_model.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace dcsim;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

std::shared_ptr<const TimeSeriesInputs> shipped_traces(std::optional<double> workload = {})
{
    auto in = load_inputs(testing::source_path("data/weather.csv"),
                          testing::source_path("data/ci.csv"),
                          testing::source_path("data/workload.csv"), 900);
    if (workload)
        std::fill(in.workload.begin(), in.workload.end(), *workload);
    return std::make_shared<const TimeSeriesInputs>(std::move(in));
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence()
{
    constexpr int kConfigs = 100;
    constexpr std::size_t kMaxCpus = 10000;
    constexpr double kTol = 1e-9;
    const auto t0 = std::chrono::steady_clock::now();

    std::mt19937_64 rng(20231);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    std::string worst_field;
    std::size_t largest = 0;
    ItState it;
    HVACResult hv;
    for (int k = 0; k < kConfigs; ++k) {
        const DCConfig cfg = testing::random_config(rng, kMaxCpus);
        largest = std::max(largest, cfg.num_cpus());
        const ItModel model(cfg);
        for (int trial = 0; trial < 3; ++trial) {
            const auto loads = testing::random_loads(rng, cfg.num_cpus());
            const double sp =
                cfg.crac_setpoint_min + (cfg.crac_setpoint_max - cfg.crac_setpoint_min) * u(rng);
            const double amb = -10.0 + 50.0 * u(rng);
            model.evaluate(sp, loads, it);
            hvac_step(cfg, it, sp, amb, hv);
            const auto ref = oracle::evaluate(cfg, sp, loads, amb);

            auto check = [&](double got, double want, const char* field) {
                const double e = oracle::rel_err(got, want);
                if (!(e <= worst)) {
                    worst = std::isnan(e) ? INFINITY : e;
                    worst_field = field;
                }
            };
            for (std::size_t i = 0; i < cfg.num_racks(); ++i) {
                check(it.cpu_w[i], ref.cpu_w[i], "P_CPU");
                check(it.fan_w[i], ref.fan_w[i], "P_ITFan");
                check(it.rack_w[i], ref.rack_w[i], "P_rack");
                check(hv.rack_outlet_temps[i], ref.outlet[i], "T_outlet");
            }
            check(it.total_w, ref.p_it, "P_datacenter");
            check(hv.crac_return_temp, ref.t_return, "T_CRACreturn");
            check(hv.p_cool, ref.p_cool, "P_cool");
            check(hv.p_chiller, ref.p_chiller, "P_chiller");
            check(hv.ct_airflow, ref.v_ct, "V_ct");
            check(hv.p_hvac_cooling, ref.p_hvac, "P_HVAC");
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = worst <= kTol && secs < 120.0;
    return {pass, fmt("%.0f configs (largest %.0f CPUs), worst rel err %.3g (", double(kConfigs),
                      static_cast<double>(largest), worst) +
                      (worst_field.empty() ? "-" : worst_field) +
                      fmt(") <= 1e-9, %.1f s < 120 s", secs)};
}

Outcome energy_balance()
{
    const DCConfig cfg = testing::reference_config();
    EnvOptions opt;
    opt.episode_days = 30;
    Environment env(cfg, shipped_traces(), opt);
    env.reset(0, 0);
    const double hc = cfg.c_air * cfg.rho_air;
    const double factor = 1.0 + 1.0 / 6.0;
    double worst = 0.0;
    std::size_t chiller_mismatch = 0, steps = 0;
    bool done = false;
    while (!done) {
        done = env.step(18.0 + 9.0 * std::sin(0.01 * static_cast<double>(steps))).truncated;
        const auto& s = env.state();
        for (std::size_t i = 0; i < cfg.num_racks(); ++i) {
            const double carried = (s.hvac.rack_outlet_temps[i] - s.it.inlet_c[i]) * hc *
                                   s.it.airflow_m3s[i];
            worst = std::max(worst, oracle::rel_err(carried, s.it.rack_w[i]));
        }
        if (s.hvac.p_chiller != s.hvac.p_cool * factor)
            ++chiller_mismatch;
        ++steps;
    }
    const bool pass = steps == 2880 && worst <= 1e-9 && chiller_mismatch == 0 &&
                      cfg.chiller_cop == 6.0 && cfg.num_cpus() == 2000;
    return {pass, fmt("%.0f steps x 50 racks, worst balance residual %.3g <= 1e-9, "
                      "chiller identity mismatches %.0f",
                      static_cast<double>(steps), worst, static_cast<double>(chiller_mismatch))};
}

struct TimingResults {
    bench::BenchReport report;
    bool ok = false;
};

TimingResults& method_bench()
{
    static TimingResults r = [] {
        TimingResults t;
        bench::MethodBenchOptions opt; // 10 repetitions, 100 warm-up, 1000 measured steps
        t.report = bench::bench_methods(testing::reference_config(), shipped_traces(), opt);
        t.ok = true;
        return t;
    }();
    return r;
}

const bench::Stats* find(const std::vector<bench::MethodRow>& rows, const std::string& name)
{
    for (const auto& r : rows)
        if (r.name == name)
            return &r.stats;
    return nullptr;
}

Outcome method_timings()
{
    const auto& rep = method_bench().report;
    const auto* init = find(rep.methods, "init");
    const auto* reset = find(rep.methods, "reset");
    const auto* step = find(rep.methods, "step");
    if (!init || !reset || !step)
        return {false, "missing method rows"};
    const bool pass = rep.cpu_count == 2000 && init->repetitions == 10 && init->mean <= 50e-3 &&
                      reset->mean <= 0.5e-3 && step->mean <= 1e-3;
    return {pass, fmt("init %.3f ms <= 50, reset %.4f ms <= 0.5, step %.4f ms <= 1 ", init->mean * 1e3,
                      reset->mean * 1e3, step->mean * 1e3) +
                      "(2000 CPUs, 10 reps)"};
}

Outcome episode_totals()
{
    const auto& rep = method_bench().report;
    const auto* d7 = find(rep.episodes, "7 days");
    const auto* d30 = find(rep.episodes, "30 days");
    if (!d7 || !d30)
        return {false, "missing episode rows"};
    const bool pass = d30->mean <= 1.5 && d7->mean <= 0.4;
    return {pass, fmt("30 days %.4f s <= 1.5, 7 days %.4f s <= 0.4", d30->mean, d7->mean)};
}

Outcome sublinear_scaling()
{
    const std::vector<std::size_t> counts{1000, 4000, 10000, 40000, 100000};
    bench::ScalingBenchOptions opt; // 1000 steps, 100 warm-up, fastest of 3 trials
    const auto rep = bench::bench_scaling(testing::reference_config(), shipped_traces(), counts, opt);
    if (rep.scaling.size() != counts.size() || !rep.scaling_exponent)
        return {false, "sweep incomplete: " + rep.error};
    const double t10k = rep.scaling[2].mean_step_seconds;
    const double t100k = rep.scaling[4].mean_step_seconds;
    const double slope = *rep.scaling_exponent;
    std::string table;
    for (const auto& r : rep.scaling)
        table += fmt(" %.0f:", static_cast<double>(r.cpu_count)) +
                 fmt("%.1fus", r.mean_step_seconds * 1e6);
    const bool pass = slope < 1.0 && t100k <= 25.0 * t10k;
    return {pass, fmt("log-log slope %.3f < 1, t(100k)/t(10k) = %.2f <= 25;", slope, t100k / t10k) +
                      table};
}

Outcome setpoint_monotonicity()
{
    const DCConfig cfg = testing::reference_config();
    const auto in = shipped_traces(0.5);
    EnvOptions opt;
    opt.episode_days = 7;
    std::vector<double> totals;
    double worst_oracle = 0.0;
    const std::vector<double> loads(cfg.num_cpus(), 0.5);
    for (int sp = 15; sp <= 27; ++sp) {
        Environment env(cfg, in, opt);
        env.reset(0, 0);
        double wh = 0.0, ref_wh = 0.0;
        bool done = false;
        std::size_t k = 0;
        while (!done) {
            const auto t = env.step(sp);
            wh += t.info.energy_wh;
            const auto ref = oracle::evaluate(cfg, sp, loads, in->ambient_c[k++]);
            ref_wh += (ref.p_it + ref.p_hvac) * cfg.timestep_seconds / 3600.0;
            done = t.truncated;
        }
        worst_oracle = std::max(worst_oracle, oracle::rel_err(wh, ref_wh));
        totals.push_back(wh);
    }
    std::size_t increases = 0;
    for (std::size_t i = 1; i < totals.size(); ++i)
        if (totals[i] > totals[i - 1])
            ++increases;
    const bool pass = increases == 0 && worst_oracle <= 1e-9;
    return {pass, fmt("7-day IT+HVAC energy %.1f kWh at 15 C -> %.1f kWh at 27 C, %.0f increases, "
                      "oracle rel err %.2g",
                      totals.front() / 1e3, totals.back() / 1e3, static_cast<double>(increases),
                      worst_oracle)};
}

Outcome determinism()
{
    const auto dir = testing::scratch_dir("acceptance_det");
    auto run = [&](const std::string& out) {
        std::ostringstream o, e;
        return cli::run({"dcsim", "simulate", "--config", testing::source_path("configs/reference.json"),
                         "--out", out, "--episode-days", "7", "--setpoint", "18", "--per-rack"},
                        o, e);
    };
    const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
    if (run(a) != 0 || run(b) != 0)
        return {false, "simulate failed"};
    const std::string ta = testing::read_file(a), tb = testing::read_file(b);
    const bool pass = !ta.empty() && ta == tb;
    return {pass, fmt("two 7-day simulate runs, %.0f bytes each, identical", static_cast<double>(ta.size()))};
}

Outcome config_round_trip()
{
    const std::string text = testing::read_file(testing::source_path("configs/reference.json"));
    const DCConfig cfg = parse_config(text);
    const bool values = cfg.num_rows == 5 && cfg.num_racks_per_row == 10 &&
                        cfg.num_cpus() == 2000 && cfg.c_air == 1006.0 && cfg.chiller_cop == 6.0 &&
                        cfg.it_fan_airflow_ratio_lb == std::array<double, 2>{0.0, 0.6} &&
                        cfg.it_fan_airflow_ratio_ub == std::array<double, 2>{0.7, 1.3};
    const bool valid = validate_config(cfg).empty();
    const DCConfig back = parse_config(serialize_config(cfg));
    const bool pass = values && valid && back == cfg;
    return {pass, std::string("5x10x40, C_AIR 1006, COP 6.0, LB/UB pairs; valid=") +
                      (valid ? "yes" : "no") + ", reparse equal=" + (back == cfg ? "yes" : "no")};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle_equivalence", oracle_equivalence},
        {"energy_balance", energy_balance},
        {"method_timings", method_timings},
        {"episode_totals", episode_totals},
        {"sublinear_scaling", sublinear_scaling},
        {"setpoint_monotonicity", setpoint_monotonicity},
        {"determinism", determinism},
        {"config_round_trip", config_round_trip},
    };
    std::cout << "machine: " << bench::machine_descriptor() << '\n';
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
              << '\n';
    return failures == 0 ? 0 : 1;
}
