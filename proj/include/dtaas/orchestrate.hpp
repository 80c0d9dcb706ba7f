#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "dtaas/config.hpp"
#include "dtaas/netmodel.hpp"
#include "dtaas/twin.hpp"
#include "dtaas/types.hpp"

namespace dtaas::orchestrate {

class Unsatisfiable : public std::runtime_error {
  public:
    explicit Unsatisfiable(int required)
        : std::runtime_error("required units exceed edge capacity"), required_(required) {}
    int required() const { return required_; }

  private:
    int required_;
};

/// Minimum units meeting the satisfaction threshold at `lambda_hat`; throws
/// Unsatisfiable above `capacity_units`.
int r_needed(double lambda_hat, const SLASpec& sla, double unit_rate, double gamma, int min_units,
             int capacity_units);

/// Highest arrival rate `units` can carry while still meeting the SLA:
/// mu + ln(1 - theta) / latency_threshold, floored at 0. The safety and
/// release thresholds are fractions of this value.
double sla_rate_capacity(int units, double gamma, const SLASpec& sla, double unit_rate);

enum class Trigger { SafetyThreshold, SlaBreach, Periodic, None };
std::string_view to_string(Trigger t);

struct ProvisioningDecision {
    SliceId slice = 0;
    int delta_units = 0;
    Trigger trigger = Trigger::None;
    double objective_value = 0.0;
    bool clamped = false;  // raw optimum was infeasible and was clamped by the controller
};

inline constexpr std::array<double, 4> kSteeringCandidates = {0.0, 0.1, 0.2, 0.3};

struct ReconfigAction {
    SliceId slice = 0;
    double steering_fraction = 0.0;
    double predicted_violation_sum = 0.0;
};

/// The controller's view of one slice at decision time.
struct SliceView {
    SliceId id = 0;
    SliceClass cls = SliceClass::eMBB;
    SliceClassSection config;
    int units = 0;
    double steering = 0.0;
    /// Newest telemetry delivered by monitoring (already delayed), if any.
    std::optional<TelemetryVector> observed;
};

struct ControlInput {
    std::int64_t slot = 0;
    std::span<const SliceView> slices;
    const netmodel::ResourcePool* pool = nullptr;
    /// Twins in slice order; only populated for the twin-driven controller.
    std::span<twin::SliceTwin* const> twins;
    /// Telemetry of every slice as seen `extra` slots further in the past;
    /// used by controllers with their own observation delay.
    std::function<std::optional<TelemetryVector>(SliceId, int delay)> observe_delayed;
};

struct ControlOutput {
    std::vector<ProvisioningDecision> provisioning;
    std::vector<ReconfigAction> reconfig;
    /// Slots between the decision and its effect beyond the usual one.
    int extra_actuation_delay = 0;
};

class Controller {
  public:
    virtual ~Controller() = default;
    virtual ControllerKind kind() const = 0;
    virtual ControlOutput decide(const ControlInput& input) = 0;
};

// ---------------------------------------------------------------------------
// Twin-driven provisioning

/// Everything the provisioning objective depends on for one decision.
struct ProvisionProblem {
    int current_units = 0;
    int lowest_delta = 0;   // min_units - current
    int highest_delta = 0;  // free capacity
    int capacity = 100;
    double alpha = 0.4;
    double beta = 0.6;
    double gamma = 1.0;
    RiskMode mode = RiskMode::FinalStep;
    SliceClassSection cls;
    NetworkSection net;
};

/// Forecast value that drives r_needed: the last step for final_step, the
/// horizon mean for horizon_mean.
double demand_estimate(const std::vector<double>& point, RiskMode mode);

struct ProvisionResult {
    ProvisioningDecision decision;
    std::optional<int> needed;  // absent when unsatisfiable
    double risk_after = 0.0;    // risk at the chosen allocation, no steering
};

/// J(d) = alpha * max(0, r + d - r_needed) / capacity + beta * risk(r + d)
double provision_objective(const ProvisionProblem& p, const twin::RiskSampler& sampler, int needed, int delta);

/// Exhaustive scan of J over [lowest_delta, highest_delta]; the smallest
/// minimizing delta wins ties. When r_needed exceeds capacity the slice takes
/// all free capacity and the decision is flagged as clamped.
ProvisionResult dtaas_provision(const ProvisionProblem& p, const twin::RiskSampler& sampler, int slice);

/// Picks the steering fraction minimizing the predicted violation sum over the
/// horizon; ties go to the smaller fraction.
ReconfigAction dtaas_reconfigure(SliceId slice, int units, double gamma, const SliceClassSection& cls,
                                 const NetworkSection& net, const twin::RiskSampler& sampler);

/// Inputs and outcome of one gated provisioning decision, for audit/replay.
struct ProvisionRecord {
    std::int64_t slot = 0;
    SliceId slice = 0;
    ProvisionProblem problem;
    std::vector<double> point;
    double residual_std = 0.0;
    std::uint64_t seed = 0;
    int samples = 0;
    ProvisionResult result;
};

class DtaasController final : public Controller {
  public:
    DtaasController(const ScenarioConfig& config, std::uint64_t run_seed);

    ControllerKind kind() const override { return ControllerKind::DTAAS; }
    ControlOutput decide(const ControlInput& input) override;

    /// Called for every gated provisioning decision.
    void set_audit(std::function<void(const ProvisionRecord&)> audit) { audit_ = std::move(audit); }

    /// Latest risk estimate per slice (no steering, after provisioning).
    const std::vector<std::optional<double>>& last_risk() const { return last_risk_; }

  private:
    ScenarioConfig config_;
    std::uint64_t run_seed_;
    std::vector<int> release_count_;
    std::vector<std::optional<double>> last_risk_;
    std::function<void(const ProvisionRecord&)> audit_;
};

// ---------------------------------------------------------------------------
// Reactive baseline

struct RsoState {
    int low_streak = 0;
};

/// Threshold rules on the newest observation: a breach adds step units; a
/// utilization below the low mark for persist consecutive observations
/// releases one unit.
ProvisioningDecision rso_decide(SliceId slice, const TelemetryVector& observed, const SLASpec& sla,
                                const RsoSection& rso, RsoState& state);

class RsoController final : public Controller {
  public:
    explicit RsoController(const ScenarioConfig& config);
    ControllerKind kind() const override { return ControllerKind::RSO; }
    ControlOutput decide(const ControlInput& input) override;

  private:
    ScenarioConfig config_;
    std::vector<RsoState> state_;
};

// ---------------------------------------------------------------------------
// Centralized surrogate

/// Target allocations proportional to smoothed demand with headroom, scaled
/// down proportionally when oversubscribed, then floor-quantized (never below
/// min_units).
std::vector<int> cdrl_targets(std::span<const double> demand_units, double headroom, int capacity, int min_units);

/// Real-valued unit demand of a smoothed rate (the SLA-meeting service rate
/// over the per-unit rate).
double demand_units(double smoothed_rate, const SLASpec& sla, double unit_rate, double gamma);

class CdrlController final : public Controller {
  public:
    explicit CdrlController(const ScenarioConfig& config);
    ControllerKind kind() const override { return ControllerKind::CDRL; }
    ControlOutput decide(const ControlInput& input) override;

  private:
    ScenarioConfig config_;
    std::vector<std::optional<double>> smoothed_;
    std::vector<double> gamma_;
};

std::unique_ptr<Controller> make_controller(ControllerKind kind, const ScenarioConfig& config,
                                            std::uint64_t run_seed);

}  // namespace dtaas::orchestrate
