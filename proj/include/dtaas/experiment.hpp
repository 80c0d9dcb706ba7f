#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dtaas/config.hpp"
#include "dtaas/engine.hpp"
#include "dtaas/metrics.hpp"

namespace dtaas::experiment {

struct Options {
    std::vector<ControllerKind> controllers{kControllers.begin(), kControllers.end()};
    /// Worker threads; 0 uses the hardware concurrency.
    int jobs = 0;
    /// Called once per finished run, possibly from a worker thread.
    std::function<void(const engine::RunTrace&)> on_run;
};

struct Result {
    std::vector<std::uint64_t> seeds;  // repetition i uses seeds[i]
    std::map<ControllerKind, std::vector<metrics::RunMetrics>> runs;
    metrics::Report report;
};

/// Seed of repetition i.
inline std::uint64_t repetition_seed(const ScenarioConfig& config, int i) {
    return config.scenario.seed + static_cast<std::uint64_t>(i);
}

/// Runs every controller on every repetition. Controllers of one repetition
/// share the same pre-generated traffic. Results do not depend on `jobs`.
Result run_experiment(const ScenarioConfig& config, const Options& options = {});

enum class SweepParameter { Load, Horizon, Slices };

std::string_view to_string(SweepParameter p);
std::optional<SweepParameter> parse_sweep_parameter(std::string_view s);

/// Default grid of a sweep: LOAD 0.4..1.2 step 0.1, HORIZON 1..10, SLICES 3..24 step 3.
std::vector<double> default_grid(SweepParameter p);

/// Copy of `config` with the swept parameter set to `value`.
ScenarioConfig apply_sweep_value(const ScenarioConfig& config, SweepParameter p, double value);

struct SweepPoint {
    double value = 0.0;
    metrics::Report report;
};

std::vector<SweepPoint> run_sweep(const ScenarioConfig& config, SweepParameter p, const std::vector<double>& values,
                                  const Options& options = {});

/// Aggregate rows only. Columns: x_value, controller, metric, mean, std.
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);

}  // namespace dtaas::experiment
