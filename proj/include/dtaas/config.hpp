#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dtaas/types.hpp"

namespace dtaas {

struct ScenarioSection {
    int horizon_slots = 5000;
    int repetitions = 10;
    std::uint64_t seed = 20250101;
    double load_scale = 1.0;
    int num_slices = 3;
    double slot_ms = 1000.0;
    ControllerKind controller = ControllerKind::DTAAS;

    bool operator==(const ScenarioSection&) const = default;
};

struct TrafficSection {
    double burst_factor = 1.5;
    double burst_enter_prob = 0.05;
    double burst_exit_prob = 0.2;
    double channel_ar_coeff = 0.9;
    double channel_noise_std = 0.02;
    double gamma_min = 0.3;

    bool operator==(const TrafficSection&) const = default;
};

struct NetworkSection {
    int edge_capacity_units = 100;
    int min_units = 1;
    double unit_service_rate = 0.02;  // req/ms per resource unit
    double latency_cap_ms = 1000.0;
    double steering_penalty_ms = 2.0;
    double overflow_margin = 0.5;  // req/ms of spare service rate in the overflow pool

    bool operator==(const NetworkSection&) const = default;
};

struct SliceClassSection {
    double base_rate = 0.3;  // req/ms at load_scale 1 with three slices
    double transport_core_offset_ms = 0.0;
    SLASpec sla;

    bool operator==(const SliceClassSection&) const = default;
};

struct TwinSection {
    int update_interval_slots = 1;
    int sync_delay_slots = 1;
    int risk_samples = 200;
    RiskMode risk_mode = RiskMode::HorizonMean;
    double rate_scale = 1.0;  // req/ms divisor applied to lambda in fidelity/error norms

    bool operator==(const TwinSection&) const = default;
};

struct ForecastSection {
    ForecasterKind kind = ForecasterKind::Recurrent;
    FeatureSet features = FeatureSet::Full;
    int horizon = 5;
    int history_window = 50;
    int hidden_size = 64;
    int encoder_length = 8;
    double learning_rate = 0.001;
    double residual_decay = 0.99;
    double initial_residual_std = 0.05;
    double min_residual_std = 0.01;  // lower bound on the published residual std
    int warmup_observations = 10;
    int ar_order = 3;
    double rls_forgetting = 1.0;

    bool operator==(const ForecastSection&) const = default;
};

struct DtaasSection {
    double alpha = 0.4;
    double beta = 0.6;
    double release_fraction = 0.5;
    int release_persist_slots = 10;
    double reconfig_risk_threshold = 0.05;

    bool operator==(const DtaasSection&) const = default;
};

struct RsoSection {
    int step_units = 2;
    double low_utilization = 0.5;
    int persist_slots = 5;

    bool operator==(const RsoSection&) const = default;
};

struct CdrlSection {
    int period_slots = 10;
    int observation_delay_slots = 2;
    double demand_decay = 0.9;
    double headroom = 1.2;
    int slices_per_extra_delay = 5;

    bool operator==(const CdrlSection&) const = default;
};

/// Every tunable of a simulation scenario. Plain value type; immutable once
/// validated and safe to share across parallel runs.
struct ScenarioConfig {
    ScenarioSection scenario;
    TrafficSection traffic;
    NetworkSection network;
    std::array<SliceClassSection, 3> classes;  // indexed by SliceClass
    TwinSection twin;
    ForecastSection forecast;
    DtaasSection dtaas;
    RsoSection rso;
    CdrlSection cdrl;

    const SliceClassSection& of(SliceClass c) const { return classes[index_of(c)]; }
    SliceClassSection& of(SliceClass c) { return classes[index_of(c)]; }

    bool operator==(const ScenarioConfig&) const = default;
};

ScenarioConfig default_config();

struct FieldError {
    std::string field;
    std::string value;
    std::string constraint;

    std::string message() const;
};

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<FieldError> errors);
    const std::vector<FieldError>& errors() const noexcept { return errors_; }

  private:
    std::vector<FieldError> errors_;
};

/// All violated constraints; empty when the config is valid.
std::vector<FieldError> validate(const ScenarioConfig& config);

/// Throws ConfigError listing every violation.
const ScenarioConfig& require_valid(const ScenarioConfig& config);

/// Canonical scenario-file text: `[section]` headers followed by `key = value` lines.
std::string serialize(const ScenarioConfig& config);

/// Parses scenario-file text on top of default_config(). Unknown sections or keys,
/// malformed values and duplicate keys are errors. The result is validated.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::string& path);

/// Sets one field by dotted path (`dtaas.alpha`). A bare key (`alpha`) is accepted
/// when it names exactly one field. Does not validate.
void apply_override(ScenarioConfig& config, std::string_view assignment);

/// Dotted paths of every schema field in canonical order.
std::vector<std::string> field_paths();

}  // namespace dtaas
