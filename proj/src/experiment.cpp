#include "dtaas/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <future>
#include <thread>

#include "dtaas/csv.hpp"
#include "dtaas/traffic.hpp"

namespace dtaas::experiment {

Result run_experiment(const ScenarioConfig& config, const Options& options) {
    require_valid(config);
    const int reps = config.scenario.repetitions;
    const auto& ctrls = options.controllers;
    Result result;
    for (int i = 0; i < reps; ++i) result.seeds.push_back(repetition_seed(config, i));

    // One task per repetition: generate traffic once, then run each controller on it.
    std::vector<std::vector<metrics::RunMetrics>> per_rep(static_cast<std::size_t>(reps));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < reps; i = next++) {
            const auto seed = result.seeds[static_cast<std::size_t>(i)];
            const auto traffic = traffic::generate(config, seed);
            engine::RunOptions ro;
            ro.traffic = &traffic;
            auto& out = per_rep[static_cast<std::size_t>(i)];
            for (auto c : ctrls) {
                const auto trace = engine::run_scenario(config, c, seed, ro);
                out.push_back(metrics::run_metrics(trace));
                if (options.on_run) options.on_run(trace);
            }
        }
    };
    int jobs = options.jobs > 0 ? options.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::max(1, std::min(jobs, reps));
    std::vector<std::future<void>> futures;
    for (int j = 1; j < jobs; ++j) futures.push_back(std::async(std::launch::async, worker));
    std::exception_ptr failure;
    try {
        worker();
    } catch (...) {
        failure = std::current_exception();
        next = reps;
    }
    for (auto& f : futures) {
        try {
            f.get();
        } catch (...) {
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t c = 0; c < ctrls.size(); ++c) {
        auto& list = result.runs[ctrls[c]];
        for (const auto& rep : per_rep) list.push_back(rep[c]);
    }
    result.report = metrics::build_report(result.runs);
    return result;
}

std::string_view to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::Load: return "LOAD";
        case SweepParameter::Horizon: return "HORIZON";
        case SweepParameter::Slices: return "SLICES";
    }
    return "?";
}

std::optional<SweepParameter> parse_sweep_parameter(std::string_view s) {
    std::string u(s);
    for (char& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (auto p : {SweepParameter::Load, SweepParameter::Horizon, SweepParameter::Slices}) {
        if (u == to_string(p)) return p;
    }
    return std::nullopt;
}

std::vector<double> default_grid(SweepParameter p) {
    std::vector<double> v;
    switch (p) {
        case SweepParameter::Load:
            for (int i = 4; i <= 12; ++i) v.push_back(i / 10.0);
            break;
        case SweepParameter::Horizon:
            for (int i = 1; i <= 10; ++i) v.push_back(i);
            break;
        case SweepParameter::Slices:
            for (int i = 3; i <= 24; i += 3) v.push_back(i);
            break;
    }
    return v;
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& config, SweepParameter p, double value) {
    ScenarioConfig c = config;
    switch (p) {
        case SweepParameter::Load: c.scenario.load_scale = value; break;
        case SweepParameter::Horizon: c.forecast.horizon = static_cast<int>(std::lround(value)); break;
        case SweepParameter::Slices: c.scenario.num_slices = static_cast<int>(std::lround(value)); break;
    }
    return c;
}

std::vector<SweepPoint> run_sweep(const ScenarioConfig& config, SweepParameter p, const std::vector<double>& values,
                                  const Options& options) {
    std::vector<SweepPoint> out;
    for (double v : values) {
        const auto c = apply_sweep_value(config, p, v);
        out.push_back({v, run_experiment(c, options).report});
    }
    return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
    csv::Writer w(out);
    w.row("x_value", "controller", "metric", "mean", "std");
    for (const auto& pt : points) {
        for (const auto& r : pt.report.rows) {
            if (r.scope != "all") continue;
            w.row(pt.value, dtaas::to_string(r.controller), r.metric, r.summary.mean, r.summary.std);
        }
    }
}

}  // namespace dtaas::experiment
