#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "dtaas/config.hpp"
#include "dtaas/seq2seq.hpp"
#include "dtaas/types.hpp"

namespace dtaas::forecast {

struct Forecast {
    std::vector<double> point;  // predicted rates for the next h slots, req/ms
    double residual_std = 0.0;
    std::int64_t first_slot = 0;  // slot the first entry refers to
};

struct Observation {
    std::int64_t slot = 0;
    TelemetryVector telemetry;
};

/// Bounded oldest-to-newest window of observations.
class HistoryWindow {
  public:
    explicit HistoryWindow(std::size_t capacity) : capacity_(capacity) {}

    void push(const Observation& o) {
        if (items_.size() == capacity_) items_.pop_front();
        items_.push_back(o);
    }
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return items_.empty(); }
    const Observation& operator[](std::size_t i) const { return items_[i]; }
    const Observation& back() const { return items_.back(); }

  private:
    std::size_t capacity_;
    std::deque<Observation> items_;
};

struct ForecasterOptions {
    std::size_t history_window = 50;
    double default_rate = 0.0;  // returned while no history exists
    double residual_decay = 0.99;
    double initial_residual_std = 0.05;
    double min_residual_std = 0.0;
};

/// Sequential rate forecaster with exponentially weighted residual tracking.
///
/// observe() folds the residual of the pending one-step prediction (if it
/// targeted the observed slot) into the residual second moment, then records
/// the observation. predict() returns non-negative rates for the slots after
/// the newest observation.
class Forecaster {
  public:
    explicit Forecaster(ForecasterOptions options);
    virtual ~Forecaster() = default;
    Forecaster(const Forecaster&) = delete;
    Forecaster& operator=(const Forecaster&) = delete;

    void observe(std::int64_t slot, const TelemetryVector& telemetry);
    Forecast predict(int horizon);

    double residual_std() const;
    const HistoryWindow& history() const { return history_; }
    std::int64_t observations() const { return observations_; }

  protected:
    virtual void on_observe() {}
    /// Raw forecast; history is non-empty when called.
    virtual std::vector<double> forecast_rates(int horizon) = 0;
    /// Forecast for slots 0.. before anything was observed; default rate by default.
    virtual std::vector<double> cold_start(int horizon);

  private:
    ForecasterOptions options_;
    HistoryWindow history_;
    double residual_var_;
    std::int64_t observations_ = 0;
    std::optional<std::pair<std::int64_t, double>> pending_;  // (target slot, predicted rate)
};

/// Repeats the newest observed rate.
class LastValueForecaster final : public Forecaster {
  public:
    using Forecaster::Forecaster;

  protected:
    std::vector<double> forecast_rates(int horizon) override;
};

/// AR(p) with intercept, fitted by recursive least squares, iterated for
/// multi-step forecasts.
class ArForecaster final : public Forecaster {
  public:
    ArForecaster(ForecasterOptions options, int order, double forgetting);

    const Eigen::VectorXd& coefficients() const { return theta_; }

  protected:
    void on_observe() override;
    std::vector<double> forecast_rates(int horizon) override;

  private:
    Eigen::VectorXd regressor(const std::vector<double>& recent) const;

    int order_;
    double forgetting_;
    Eigen::VectorXd theta_;
    Eigen::MatrixXd p_;
    int fitted_ = 0;
};

/// Perfect foresight over a pre-generated rate series indexed by slot.
class OracleForecaster final : public Forecaster {
  public:
    OracleForecaster(ForecasterOptions options, std::vector<double> future_rates);

  protected:
    std::vector<double> forecast_rates(int horizon) override;
    std::vector<double> cold_start(int horizon) override;

  private:
    std::vector<double> rates_;
};

/// Online encoder-decoder GRU. Features are normalized by running mean/std;
/// until `warmup` observations exist it carries the last value forward and
/// does not train. Each observation then triggers one Adam step on the newest
/// complete (encoder window, next-horizon) pair from the history.
class RecurrentForecaster final : public Forecaster {
  public:
    struct Settings {
        FeatureSet features = FeatureSet::Full;
        int hidden = 64;
        int encoder_length = 16;
        int horizon = 5;
        double learning_rate = 0.001;
        int warmup = 10;
        std::uint64_t seed = 0;
    };

    RecurrentForecaster(ForecasterOptions options, Settings settings);

    const Seq2SeqGru& model() const { return model_; }
    std::int64_t training_steps() const { return steps_; }
    std::int64_t rejected_steps() const { return rejected_; }

    /// Sample built from the newest complete window, if the history is long enough.
    std::optional<SequenceSample> latest_training_sample() const;

  protected:
    void on_observe() override;
    std::vector<double> forecast_rates(int horizon) override;

  private:
    int feature_count() const;
    double normalized(const TelemetryVector& m, int feature) const;
    Eigen::MatrixXd encoder_inputs(std::size_t end) const;  // rows for history[end - L, end)

    Settings settings_;
    Seq2SeqGru model_;
    AdamOptimizer optimizer_;
    // Welford statistics per feature (lambda, rho, gamma, eta).
    std::array<double, 4> mean_{};
    std::array<double, 4> m2_{};
    std::int64_t count_ = 0;
    std::int64_t steps_ = 0;
    std::int64_t rejected_ = 0;
    Eigen::VectorXd grad_;
};

/// Builds the forecaster selected by config. `future_rates` feeds the oracle.
std::unique_ptr<Forecaster> make_forecaster(const ScenarioConfig& config, double default_rate,
                                            std::uint64_t seed, std::vector<double> future_rates = {});

}  // namespace dtaas::forecast
