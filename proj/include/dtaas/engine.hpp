#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtaas/config.hpp"
#include "dtaas/orchestrate.hpp"
#include "dtaas/traffic.hpp"
#include "dtaas/types.hpp"

namespace dtaas::engine {

/// Raised when a run breaks one of its internal invariants (pool
/// conservation, telemetry ranges). The run is aborted.
class InvariantViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One slice during one slot. Real-valued KPI inputs are stored at the
/// precision written to the trace files so metrics recompute exactly.
struct SliceSlotRecord {
    std::int64_t slot = 0;
    SliceId slice = 0;
    SliceClass cls = SliceClass::eMBB;
    double rate = 0.0;
    std::int64_t arrivals = 0;
    bool in_burst = false;
    TelemetryVector telemetry;
    double latency_ms = 0.0;
    int units = 0;        // allocation in force during the slot
    int units_after = 0;  // allocation in force from the next slot
    double steering = 0.0;
    bool compliant = true;
    int r_true = 0;  // required units at the realized rate and channel

    // Twin-driven runs only.
    std::optional<double> fidelity;
    std::optional<double> prediction_error;
    std::optional<double> risk;
    std::vector<double> forecast;
    std::optional<double> residual_std;
    std::optional<double> mirrored_gamma;
};

struct DecisionRecord {
    std::int64_t slot = 0;  // slot the decision was taken
    ControllerKind controller = ControllerKind::DTAAS;
    SliceId slice = 0;
    int delta_units = 0;  // delta actually applied
    double steering_fraction = 0.0;
    std::string trigger;  // orchestrate::Trigger name, or RECONFIG for steering actions
    double objective_value = 0.0;
    bool clamped = false;
};

struct RunTrace {
    ControllerKind controller = ControllerKind::DTAAS;
    std::uint64_t seed = 0;
    int num_slices = 0;
    int horizon_slots = 0;
    int forecast_horizon = 0;
    std::vector<SliceSlotRecord> records;  // slot-major, slice-minor
    std::vector<DecisionRecord> decisions;
    std::vector<std::optional<double>> aggregate_fidelity;  // per slot

    bool degenerate() const { return horizon_slots == 0; }
    const SliceSlotRecord& at(std::int64_t slot, SliceId slice) const {
        return records[static_cast<std::size_t>(slot * num_slices + slice)];
    }
};

struct RunOptions {
    /// Receives every gated twin-driven provisioning decision.
    std::function<void(const orchestrate::ProvisionRecord&)> audit;
    /// Pre-generated traffic; generated from the seed when absent.
    const traffic::TrafficTrace* traffic = nullptr;
};

/// Starting allocation shared by every controller: required units at each
/// slice's mean rate, scaled down proportionally if they do not fit.
std::vector<int> initial_allocation(const ScenarioConfig& config);

/// Runs horizon_slots slots of one controller on the traffic of `seed`.
/// Slot phases: traffic, network evaluation, twin sync and prediction error,
/// controller decision, actuation (effective next slot), logging.
RunTrace run_scenario(const ScenarioConfig& config, ControllerKind controller, std::uint64_t seed,
                      const RunOptions& options = {});

}  // namespace dtaas::engine
