#include "dtaas/twin.hpp"

#include <cmath>
#include <numeric>

#include "dtaas/csv.hpp"
#include "dtaas/netmodel.hpp"

namespace dtaas::twin {

double fidelity(const TelemetryVector& actual, const TelemetryVector& mirrored, double rate_scale) {
    const double dl = (actual.lambda - mirrored.lambda) / rate_scale;
    const double dr = actual.rho - mirrored.rho;
    const double dg = actual.gamma - mirrored.gamma;
    const double de = actual.eta - mirrored.eta;
    return std::sqrt(dl * dl + dr * dr + dg * dg + de * de);
}

double aggregate_fidelity(std::span<const double> fidelities) {
    return std::accumulate(fidelities.begin(), fidelities.end(), 0.0);
}

double prediction_error(const TelemetryVector& predicted, const TelemetryVector& actual, double rate_scale) {
    return fidelity(actual, predicted, rate_scale);
}

RiskSampler::RiskSampler(const forecast::Forecast& forecast, int samples, std::uint64_t seed)
    : RiskSampler(forecast.point, forecast.residual_std, samples, seed) {}

RiskSampler::RiskSampler(std::vector<double> point, double residual_std, int samples, std::uint64_t seed)
    : point_(std::move(point)),
      residual_std_(residual_std),
      samples_(samples),
      horizon_(static_cast<int>(point_.size())) {
    rates_.resize(static_cast<std::size_t>(samples_) * static_cast<std::size_t>(horizon_));
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int s = 0; s < samples_; ++s) {
        for (int j = 0; j < horizon_; ++j) {
            const double z = normal(rng);
            rates_[static_cast<std::size_t>(s * horizon_ + j)] =
                std::max(0.0, point_[static_cast<std::size_t>(j)] + residual_std_ * z);
        }
    }
}

bool RiskSampler::violates(double lambda, int units, double steering, double gamma, const SliceClassSection& cls,
                           const NetworkSection& net) const {
    const double mu = netmodel::service_rate(units, net.unit_service_rate, gamma);
    double eta = netmodel::eta_analytic((1.0 - steering) * lambda, mu, cls.sla.latency_threshold_ms);
    if (steering > 0.0) {
        eta = (1.0 - steering) * eta +
              steering * netmodel::eta_overflow(cls.sla.latency_threshold_ms, net.steering_penalty_ms,
                                                net.overflow_margin);
    }
    return eta < cls.sla.satisfaction_threshold;
}

double RiskSampler::risk(int units, double steering, double gamma, const SliceClassSection& cls,
                         const NetworkSection& net, RiskMode mode) const {
    if (samples_ == 0 || horizon_ == 0) return 0.0;
    int hits = 0;
    if (mode == RiskMode::FinalStep) {
        for (int s = 0; s < samples_; ++s) hits += violates(rate(s, horizon_ - 1), units, steering, gamma, cls, net);
        return static_cast<double>(hits) / samples_;
    }
    for (int s = 0; s < samples_; ++s) {
        for (int j = 0; j < horizon_; ++j) hits += violates(rate(s, j), units, steering, gamma, cls, net);
    }
    return static_cast<double>(hits) / (static_cast<double>(samples_) * horizon_);
}

double RiskSampler::violation_sum(int units, double steering, double gamma, const SliceClassSection& cls,
                                  const NetworkSection& net) const {
    double total = 0.0;
    for (int j = 0; j < horizon_; ++j) {
        int hits = 0;
        for (int s = 0; s < samples_; ++s) hits += violates(rate(s, j), units, steering, gamma, cls, net);
        total += static_cast<double>(hits) / samples_;
    }
    return total;
}

std::uint64_t risk_seed(std::uint64_t run_seed, SliceId slice, std::int64_t slot) {
    return derive_seed(run_seed, static_cast<std::uint64_t>(slice), Stream::RiskSampling,
                       static_cast<std::uint64_t>(slot));
}

SliceTwin::SliceTwin(SliceId id, const SliceClassSection& cls, const ScenarioConfig& config,
                     std::unique_ptr<forecast::Forecaster> forecaster)
    : id_(id),
      cls_(cls),
      net_(config.network),
      interval_(config.twin.update_interval_slots),
      delay_(config.twin.sync_delay_slots),
      horizon_(config.forecast.horizon),
      rate_scale_(config.twin.rate_scale),
      forecaster_(std::move(forecaster)) {}

void SliceTwin::sync(std::int64_t slot, const TelemetryVector& telemetry) {
    if (slot <= current_slot_) throw std::logic_error("SliceTwin::sync: slots must be strictly increasing");
    current_slot_ = slot;
    latest_actual_ = telemetry;
    pending_.push_back({slot, telemetry});
    std::optional<forecast::Observation> visible;
    while (!pending_.empty() && pending_.front().slot <= slot - delay_) {
        visible = pending_.front();
        pending_.pop_front();
    }
    if (visible) {
        // Keep the newest visible sample available for the next refresh.
        pending_.push_front(*visible);
    }
    if (slot % interval_ == 0 && visible && visible->slot == slot - delay_) {
        mirrored_ = visible;
        forecaster_->observe(mirrored_->slot, mirrored_->telemetry);
    }
    fidelity_log_.push_back(current_fidelity());
}

std::optional<double> SliceTwin::current_fidelity() const {
    if (!mirrored_) return std::nullopt;
    return fidelity(latest_actual_, mirrored_->telemetry, rate_scale_);
}

const forecast::Forecast& SliceTwin::refresh_forecast() {
    // Published at log precision so logged forecasts replay exactly.
    auto fresh = forecaster_->predict(horizon_);
    for (double& v : fresh.point) v = csv::quantize(v);
    fresh.residual_std = csv::quantize(fresh.residual_std);
    last_forecast_ = std::move(fresh);
    const auto& f = *last_forecast_;
    for (std::size_t j = 0; j < f.point.size(); ++j) predictions_[f.first_slot + static_cast<std::int64_t>(j)] = f.point[j];
    predictions_.erase(predictions_.begin(), predictions_.lower_bound(current_slot_));
    return f;
}

std::optional<double> SliceTwin::predicted_rate(std::int64_t slot) const {
    auto it = predictions_.find(slot);
    if (it == predictions_.end()) return std::nullopt;
    return it->second;
}

std::optional<TelemetryVector> SliceTwin::predicted_telemetry(std::int64_t slot, int units, double gamma,
                                                              double steering) const {
    const auto rate = predicted_rate(slot);
    if (!rate) return std::nullopt;
    const auto outcome = netmodel::evaluate(id_, *rate, units, gamma, steering, cls_, net_);
    return TelemetryVector{*rate, csv::quantize(outcome.utilization), gamma, csv::quantize(outcome.eta)};
}

double sla_risk(const SliceTwin& twin, int candidate_units, const ScenarioConfig& config, std::uint64_t seed,
                double steering) {
    const auto& f = twin.last_forecast();
    if (!f) throw ForecastUnavailable();
    const RiskSampler sampler(*f, config.twin.risk_samples, seed);
    return sampler.risk(candidate_units, steering, twin.assumed_gamma(), twin.class_config(), config.network,
                        config.twin.risk_mode);
}

}  // namespace dtaas::twin
