#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dtaas/config.hpp"
#include "dtaas/forecast.hpp"
#include "dtaas/rng.hpp"
#include "dtaas/types.hpp"

namespace dtaas::twin {

class ForecastUnavailable : public std::runtime_error {
  public:
    ForecastUnavailable() : std::runtime_error("no forecast available") {}
};

/// Scaled L2 distance between two telemetry vectors; lambda is divided by
/// `rate_scale`, the other components are already ratios.
double fidelity(const TelemetryVector& actual, const TelemetryVector& mirrored, double rate_scale);

/// Sum of per-twin fidelity values.
double aggregate_fidelity(std::span<const double> fidelities);

/// Monte Carlo draws of future rates shared by every candidate evaluated in
/// one decision (common random numbers): lambda~(j) = max(0, forecast_j + std * z_sj).
class RiskSampler {
  public:
    RiskSampler(const forecast::Forecast& forecast, int samples, std::uint64_t seed);
    RiskSampler(std::vector<double> point, double residual_std, int samples, std::uint64_t seed);

    int samples() const { return samples_; }
    int horizon() const { return horizon_; }
    /// Sampled rate for sample s at horizon step j (0-based).
    double rate(int s, int j) const { return rates_[static_cast<std::size_t>(s * horizon_ + j)]; }
    const std::vector<double>& point() const { return point_; }
    double residual_std() const { return residual_std_; }

    /// Indicator mean of eta < threshold. final_step scores the last horizon
    /// step only; horizon_mean averages the indicator over all steps.
    double risk(int units, double steering, double gamma, const SliceClassSection& cls, const NetworkSection& net,
                RiskMode mode) const;

    /// Sum over horizon steps of P[eta(t+j) < threshold].
    double violation_sum(int units, double steering, double gamma, const SliceClassSection& cls,
                         const NetworkSection& net) const;

  private:
    bool violates(double lambda, int units, double steering, double gamma, const SliceClassSection& cls,
                  const NetworkSection& net) const;

    std::vector<double> point_;
    double residual_std_;
    int samples_;
    int horizon_;
    std::vector<double> rates_;
};

/// Seed of the common-random-number draws for one (slice, slot) decision.
std::uint64_t risk_seed(std::uint64_t run_seed, SliceId slice, std::int64_t slot);

/// The digital replica of one slice: a delayed mirror of its telemetry, the
/// forecaster fed from that mirror, and the bookkeeping for fidelity and
/// prediction-error scoring.
class SliceTwin {
  public:
    SliceTwin(SliceId id, const SliceClassSection& cls, const ScenarioConfig& config,
              std::unique_ptr<forecast::Forecaster> forecaster);

    SliceId id() const { return id_; }
    const SliceClassSection& class_config() const { return cls_; }

    /// Receives the slice's telemetry for `slot` (strictly increasing). The
    /// mirror refreshes on update-interval boundaries to the vector emitted
    /// sync_delay slots earlier; the forecaster observes the mirror.
    void sync(std::int64_t slot, const TelemetryVector& telemetry);

    bool has_mirror() const { return mirrored_.has_value(); }
    const TelemetryVector& mirrored() const { return mirrored_->telemetry; }
    std::int64_t mirrored_slot() const { return mirrored_->slot; }
    /// Slots between the current slot and the mirrored vector's slot.
    std::int64_t staleness() const { return current_slot_ - mirrored_->slot; }

    /// Fidelity of the mirror against the latest actual telemetry.
    std::optional<double> current_fidelity() const;
    const std::vector<std::optional<double>>& fidelity_log() const { return fidelity_log_; }

    /// Issues a new forecast from the forecaster and remembers its per-slot predictions.
    const forecast::Forecast& refresh_forecast();
    const std::optional<forecast::Forecast>& last_forecast() const { return last_forecast_; }
    std::optional<double> predicted_rate(std::int64_t slot) const;

    /// Channel quality the twin assumes over the horizon (held at the mirrored value).
    double assumed_gamma() const { return mirrored_ ? mirrored_->telemetry.gamma : 1.0; }

    /// Predicted telemetry for a slot: forecast rate with utilization and
    /// satisfaction derived from the slot's realized allocation and channel.
    std::optional<TelemetryVector> predicted_telemetry(std::int64_t slot, int units, double gamma,
                                                       double steering) const;

    const forecast::Forecaster& forecaster() const { return *forecaster_; }

  private:
    SliceId id_;
    SliceClassSection cls_;
    NetworkSection net_;
    int interval_;
    int delay_;
    int horizon_;
    double rate_scale_;
    std::unique_ptr<forecast::Forecaster> forecaster_;
    std::deque<forecast::Observation> pending_;  // emitted, not yet visible to the twin
    std::optional<forecast::Observation> mirrored_;
    TelemetryVector latest_actual_;
    std::int64_t current_slot_ = -1;
    std::vector<std::optional<double>> fidelity_log_;
    std::optional<forecast::Forecast> last_forecast_;
    std::map<std::int64_t, double> predictions_;
};

/// Prediction error: same scaled norm as fidelity.
double prediction_error(const TelemetryVector& predicted, const TelemetryVector& actual, double rate_scale);

/// SLA risk of a candidate allocation from the twin's latest forecast.
/// Throws ForecastUnavailable when the twin has not forecast yet.
double sla_risk(const SliceTwin& twin, int candidate_units, const ScenarioConfig& config, std::uint64_t seed,
                double steering = 0.0);

}  // namespace dtaas::twin
