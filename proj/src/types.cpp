#include "dtaas/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace dtaas {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return out;
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_from(std::string_view s, const std::array<Enum, N>& values) {
    const auto needle = lower(s);
    for (Enum v : values) {
        if (lower(to_string(v)) == needle) return v;
    }
    return std::nullopt;
}

}  // namespace

std::string_view to_string(SliceClass c) {
    switch (c) {
        case SliceClass::eMBB: return "eMBB";
        case SliceClass::URLLC: return "URLLC";
        case SliceClass::mMTC: return "mMTC";
    }
    return "?";
}

std::optional<SliceClass> parse_slice_class(std::string_view s) { return parse_from(s, kSliceClasses); }

SLASpec default_sla(SliceClass c) {
    switch (c) {
        case SliceClass::eMBB: return {20.0, 0.95, 0.8};
        case SliceClass::URLLC: return {5.0, 0.95, 0.8};
        case SliceClass::mMTC: return {50.0, 0.95, 0.8};
    }
    return {};
}

bool is_valid(const TelemetryVector& m) {
    auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    return std::isfinite(m.lambda) && m.lambda >= 0.0 && unit(m.rho) && unit(m.gamma) && unit(m.eta);
}

std::string_view to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::DTAAS: return "DTAAS";
        case ControllerKind::RSO: return "RSO";
        case ControllerKind::CDRL: return "CDRL";
    }
    return "?";
}

std::string_view to_string(ForecasterKind k) {
    switch (k) {
        case ForecasterKind::Recurrent: return "recurrent";
        case ForecasterKind::AutoRegressive: return "ar";
        case ForecasterKind::Oracle: return "oracle";
        case ForecasterKind::LastValue: return "last_value";
    }
    return "?";
}

std::string_view to_string(RiskMode k) {
    switch (k) {
        case RiskMode::FinalStep: return "final_step";
        case RiskMode::HorizonMean: return "horizon_mean";
    }
    return "?";
}

std::string_view to_string(FeatureSet k) {
    switch (k) {
        case FeatureSet::Full: return "full";
        case FeatureSet::LambdaOnly: return "lambda_only";
    }
    return "?";
}

std::optional<ControllerKind> parse_controller(std::string_view s) { return parse_from(s, kControllers); }

std::optional<ForecasterKind> parse_forecaster(std::string_view s) {
    constexpr std::array<ForecasterKind, 4> all = {ForecasterKind::Recurrent, ForecasterKind::AutoRegressive,
                                                   ForecasterKind::Oracle, ForecasterKind::LastValue};
    return parse_from(s, all);
}

std::optional<RiskMode> parse_risk_mode(std::string_view s) {
    constexpr std::array<RiskMode, 2> all = {RiskMode::FinalStep, RiskMode::HorizonMean};
    return parse_from(s, all);
}

std::optional<FeatureSet> parse_feature_set(std::string_view s) {
    constexpr std::array<FeatureSet, 2> all = {FeatureSet::Full, FeatureSet::LambdaOnly};
    return parse_from(s, all);
}

}  // namespace dtaas
