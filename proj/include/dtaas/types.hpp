#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dtaas {

enum class SliceClass { eMBB, URLLC, mMTC };

inline constexpr std::array<SliceClass, 3> kSliceClasses = {SliceClass::eMBB, SliceClass::URLLC,
                                                            SliceClass::mMTC};

std::string_view to_string(SliceClass c);
std::optional<SliceClass> parse_slice_class(std::string_view s);
inline constexpr std::size_t index_of(SliceClass c) { return static_cast<std::size_t>(c); }

/// Per-class service level agreement.
///
/// `satisfaction_threshold` is the bound the per-slot satisfaction ratio must
/// reach for the slot to count as compliant. `safety_fraction` scales the
/// current service rate into the proactive trigger level.
struct SLASpec {
    double latency_threshold_ms = 20.0;
    double satisfaction_threshold = 0.95;
    double safety_fraction = 0.8;

    bool operator==(const SLASpec&) const = default;
};

SLASpec default_sla(SliceClass c);

/// One slot of slice telemetry: arrival rate (req/ms), utilization,
/// channel quality and observed SLA satisfaction ratio.
struct TelemetryVector {
    double lambda = 0.0;
    double rho = 0.0;
    double gamma = 1.0;
    double eta = 1.0;

    bool operator==(const TelemetryVector&) const = default;
};

bool is_valid(const TelemetryVector& m);

using SliceId = int;

enum class ControllerKind { DTAAS, RSO, CDRL };
enum class ForecasterKind { Recurrent, AutoRegressive, Oracle, LastValue };
enum class RiskMode { FinalStep, HorizonMean };
enum class FeatureSet { Full, LambdaOnly };

std::string_view to_string(ControllerKind k);
std::string_view to_string(ForecasterKind k);
std::string_view to_string(RiskMode k);
std::string_view to_string(FeatureSet k);
std::optional<ControllerKind> parse_controller(std::string_view s);
std::optional<ForecasterKind> parse_forecaster(std::string_view s);
std::optional<RiskMode> parse_risk_mode(std::string_view s);
std::optional<FeatureSet> parse_feature_set(std::string_view s);

inline constexpr std::array<ControllerKind, 3> kControllers = {
    ControllerKind::DTAAS, ControllerKind::RSO, ControllerKind::CDRL};

}  // namespace dtaas
