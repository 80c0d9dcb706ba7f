#include "dtaas/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dtaas::forecast {

Forecaster::Forecaster(ForecasterOptions options)
    : options_(options),
      history_(std::max<std::size_t>(1, options.history_window)),
      residual_var_(options.initial_residual_std * options.initial_residual_std) {}

void Forecaster::observe(std::int64_t slot, const TelemetryVector& telemetry) {
    if (pending_ && pending_->first == slot) {
        const double residual = telemetry.lambda - pending_->second;
        residual_var_ = options_.residual_decay * residual_var_ + (1.0 - options_.residual_decay) * residual * residual;
        pending_.reset();
    }
    history_.push({slot, telemetry});
    ++observations_;
    on_observe();
}

Forecast Forecaster::predict(int horizon) {
    Forecast f;
    f.residual_std = residual_std();
    if (history_.empty()) {
        f.point = cold_start(horizon);
        f.point.resize(static_cast<std::size_t>(horizon), options_.default_rate);
        f.first_slot = 0;
        return f;
    }
    f.point = forecast_rates(horizon);
    f.point.resize(static_cast<std::size_t>(horizon), f.point.empty() ? history_.back().telemetry.lambda
                                                                      : f.point.back());
    for (double& v : f.point) {
        if (!std::isfinite(v) || v < 0.0) v = std::isfinite(v) ? 0.0 : history_.back().telemetry.lambda;
    }
    f.first_slot = history_.back().slot + 1;
    pending_ = {f.first_slot, f.point.front()};
    return f;
}

double Forecaster::residual_std() const { return std::max(options_.min_residual_std, std::sqrt(residual_var_)); }

std::vector<double> LastValueForecaster::forecast_rates(int horizon) {
    return std::vector<double>(static_cast<std::size_t>(horizon), history().back().telemetry.lambda);
}

ArForecaster::ArForecaster(ForecasterOptions options, int order, double forgetting)
    : Forecaster(options),
      order_(order),
      forgetting_(forgetting),
      theta_(Eigen::VectorXd::Zero(order + 1)),
      p_(Eigen::MatrixXd::Identity(order + 1, order + 1) * 1e4) {}

Eigen::VectorXd ArForecaster::regressor(const std::vector<double>& recent) const {
    // recent: newest first
    Eigen::VectorXd phi(order_ + 1);
    phi[0] = 1.0;
    for (int i = 0; i < order_; ++i) phi[i + 1] = recent[static_cast<std::size_t>(i)];
    return phi;
}

void ArForecaster::on_observe() {
    const auto& h = history();
    if (h.size() < static_cast<std::size_t>(order_) + 1) return;
    std::vector<double> lags(static_cast<std::size_t>(order_));
    const std::size_t n = h.size();
    for (int i = 0; i < order_; ++i) lags[static_cast<std::size_t>(i)] = h[n - 2 - static_cast<std::size_t>(i)].telemetry.lambda;
    const Eigen::VectorXd phi = regressor(lags);
    const double y = h.back().telemetry.lambda;
    const Eigen::VectorXd p_phi = p_ * phi;
    const double denom = forgetting_ + phi.dot(p_phi);
    const Eigen::VectorXd gain = p_phi / denom;
    theta_ += gain * (y - phi.dot(theta_));
    p_ = (p_ - gain * p_phi.transpose()) / forgetting_;
    p_ = 0.5 * (p_ + p_.transpose());
    ++fitted_;
}

std::vector<double> ArForecaster::forecast_rates(int horizon) {
    const auto& h = history();
    std::vector<double> out(static_cast<std::size_t>(horizon));
    if (fitted_ == 0) {
        std::fill(out.begin(), out.end(), h.back().telemetry.lambda);
        return out;
    }
    std::vector<double> recent;  // newest first
    for (std::size_t i = 0; i < static_cast<std::size_t>(order_); ++i) recent.push_back(h[h.size() - 1 - i].telemetry.lambda);
    for (int j = 0; j < horizon; ++j) {
        const double next = regressor(recent).dot(theta_);
        out[static_cast<std::size_t>(j)] = next;
        recent.insert(recent.begin(), next);
        recent.pop_back();
    }
    return out;
}

OracleForecaster::OracleForecaster(ForecasterOptions options, std::vector<double> future_rates)
    : Forecaster(options), rates_(std::move(future_rates)) {}

std::vector<double> Forecaster::cold_start(int horizon) {
    return std::vector<double>(static_cast<std::size_t>(horizon), options_.default_rate);
}

std::vector<double> OracleForecaster::cold_start(int horizon) {
    std::vector<double> out;
    for (std::size_t j = 0; j < static_cast<std::size_t>(horizon) && j < rates_.size(); ++j) out.push_back(rates_[j]);
    return out;
}

std::vector<double> OracleForecaster::forecast_rates(int horizon) {
    std::vector<double> out(static_cast<std::size_t>(horizon));
    const std::int64_t first = history().back().slot + 1;
    for (int j = 0; j < horizon; ++j) {
        const auto slot = first + j;
        if (slot >= 0 && slot < static_cast<std::int64_t>(rates_.size())) {
            out[static_cast<std::size_t>(j)] = rates_[static_cast<std::size_t>(slot)];
        } else {
            out[static_cast<std::size_t>(j)] = j > 0 ? out[static_cast<std::size_t>(j) - 1] : history().back().telemetry.lambda;
        }
    }
    return out;
}

namespace {
double feature_value(const TelemetryVector& m, int feature) {
    switch (feature) {
        case 0: return m.lambda;
        case 1: return m.rho;
        case 2: return m.gamma;
        default: return m.eta;
    }
}

constexpr double kStdFloor = 1e-3;
}  // namespace

RecurrentForecaster::RecurrentForecaster(ForecasterOptions options, Settings settings)
    : Forecaster(options),
      settings_(settings),
      model_(settings.features == FeatureSet::Full ? 4 : 1, settings.hidden, settings.horizon, settings.seed),
      optimizer_(model_.parameter_count(), settings.learning_rate) {}

int RecurrentForecaster::feature_count() const { return settings_.features == FeatureSet::Full ? 4 : 1; }

double RecurrentForecaster::normalized(const TelemetryVector& m, int feature) const {
    const auto f = static_cast<std::size_t>(feature);
    const double var = count_ > 1 ? m2_[f] / static_cast<double>(count_ - 1) : 0.0;
    const double sd = std::max(std::sqrt(var), kStdFloor);
    return (feature_value(m, feature) - mean_[f]) / sd;
}

Eigen::MatrixXd RecurrentForecaster::encoder_inputs(std::size_t end) const {
    const auto L = static_cast<std::size_t>(settings_.encoder_length);
    const int F = feature_count();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(L), F);
    for (std::size_t i = 0; i < L; ++i) {
        const auto& m = history()[end - L + i].telemetry;
        for (int f = 0; f < F; ++f) x(static_cast<Eigen::Index>(i), f) = normalized(m, f);
    }
    return x;
}

std::optional<SequenceSample> RecurrentForecaster::latest_training_sample() const {
    const auto L = static_cast<std::size_t>(settings_.encoder_length);
    const auto H = static_cast<std::size_t>(settings_.horizon);
    const std::size_t n = history().size();
    if (n < L + H) return std::nullopt;
    SequenceSample s;
    const std::size_t end = n - H;
    s.inputs = encoder_inputs(end);
    s.decoder_seed = normalized(history()[end - 1].telemetry, 0);
    s.targets.resize(static_cast<Eigen::Index>(H));
    for (std::size_t j = 0; j < H; ++j) s.targets[static_cast<Eigen::Index>(j)] = normalized(history()[end + j].telemetry, 0);
    return s;
}

void RecurrentForecaster::on_observe() {
    const auto& m = history().back().telemetry;
    ++count_;
    for (int f = 0; f < 4; ++f) {
        const auto i = static_cast<std::size_t>(f);
        const double x = feature_value(m, f);
        const double delta = x - mean_[i];
        mean_[i] += delta / static_cast<double>(count_);
        m2_[i] += delta * (x - mean_[i]);
    }
    if (count_ < settings_.warmup) return;
    auto sample = latest_training_sample();
    if (!sample) return;
    model_.loss_and_gradient(*sample, grad_);
    if (!grad_.allFinite()) {
        ++rejected_;
        return;
    }
    Eigen::VectorXd before = model_.parameters();
    optimizer_.step(model_.parameters(), grad_);
    if (!model_.parameters().allFinite()) {
        model_.parameters() = std::move(before);
        ++rejected_;
        return;
    }
    ++steps_;
}

std::vector<double> RecurrentForecaster::forecast_rates(int horizon) {
    const auto L = static_cast<std::size_t>(settings_.encoder_length);
    const double last = history().back().telemetry.lambda;
    if (count_ < settings_.warmup || history().size() < L) {
        return std::vector<double>(static_cast<std::size_t>(horizon), last);
    }
    const double var = count_ > 1 ? m2_[0] / static_cast<double>(count_ - 1) : 0.0;
    // A rate that has never moved is carried forward rather than decoded from noise.
    if (std::sqrt(var) < kStdFloor) return std::vector<double>(static_cast<std::size_t>(horizon), last);
    const double sd = std::sqrt(var);
    const Eigen::MatrixXd x = encoder_inputs(history().size());
    const Eigen::VectorXd y = model_.predict(x, normalized(history().back().telemetry, 0));
    std::vector<double> out(static_cast<std::size_t>(horizon));
    for (int j = 0; j < horizon; ++j) {
        const double yj = y[std::min<Eigen::Index>(j, y.size() - 1)];
        out[static_cast<std::size_t>(j)] = mean_[0] + sd * yj;
    }
    return out;
}

std::unique_ptr<Forecaster> make_forecaster(const ScenarioConfig& config, double default_rate, std::uint64_t seed,
                                            std::vector<double> future_rates) {
    const auto& fc = config.forecast;
    ForecasterOptions opts{static_cast<std::size_t>(fc.history_window), default_rate, fc.residual_decay,
                           fc.initial_residual_std, fc.min_residual_std};
    switch (fc.kind) {
        case ForecasterKind::LastValue: return std::make_unique<LastValueForecaster>(opts);
        case ForecasterKind::AutoRegressive:
            return std::make_unique<ArForecaster>(opts, fc.ar_order, fc.rls_forgetting);
        case ForecasterKind::Oracle: return std::make_unique<OracleForecaster>(opts, std::move(future_rates));
        case ForecasterKind::Recurrent: {
            RecurrentForecaster::Settings s{fc.features, fc.hidden_size, fc.encoder_length, fc.horizon,
                                            fc.learning_rate, fc.warmup_observations, seed};
            return std::make_unique<RecurrentForecaster>(opts, s);
        }
    }
    throw std::logic_error("unknown forecaster kind");
}

}  // namespace dtaas::forecast
