#include <doctest.h>

#include <cmath>

#include "dtaas/engine.hpp"
#include "dtaas/forecast.hpp"

using namespace dtaas;
using namespace dtaas::forecast;

namespace {

TelemetryVector rate(double lambda) { return {lambda, 0.5, 1.0, 1.0}; }

ForecasterOptions options(double default_rate = 0.3) {
    ForecasterOptions o;
    o.default_rate = default_rate;
    return o;
}

}  // namespace

TEST_CASE("history window evicts the oldest") {
    HistoryWindow w(3);
    for (int i = 0; i < 5; ++i) w.push({i, rate(i)});
    CHECK(w.size() == 3);
    CHECK(w[0].slot == 2);
    CHECK(w.back().slot == 4);
}

TEST_CASE("empty history falls back to the default rate") {
    LastValueForecaster f(options(0.3));
    const auto p = f.predict(5);
    CHECK(p.point == std::vector<double>(5, 0.3));
    CHECK(p.residual_std == doctest::Approx(0.05));
}

TEST_CASE("first observation leaves the residual untouched") {
    LastValueForecaster f(options());
    f.observe(0, rate(0.7));
    CHECK(f.residual_std() == doctest::Approx(0.05));
}

TEST_CASE("alternating residuals of 0.1 drive the residual std to 0.1") {
    LastValueForecaster f(options());
    for (int t = 0; t < 2000; ++t) {
        f.predict(1);
        f.observe(t, rate(t % 2 ? 0.4 : 0.3));
    }
    CHECK(std::abs(f.residual_std() - 0.1) <= 0.005);
}

TEST_CASE("residual floor") {
    auto o = options();
    o.min_residual_std = 0.02;
    LastValueForecaster f(o);
    for (int t = 0; t < 3000; ++t) {
        f.predict(1);
        f.observe(t, rate(0.3));
    }
    CHECK(f.residual_std() == 0.02);
}

TEST_CASE("AR converges on a constant series") {
    ArForecaster f(options(), 3, 1.0);
    for (int t = 0; t < 100; ++t) f.observe(t, rate(0.3));
    for (double v : f.predict(5).point) CHECK(std::abs(v - 0.3) < 0.001);
}

TEST_CASE("AR tracks a ramp like batch least squares") {
    ArForecaster f(options(), 3, 1.0);
    std::vector<double> series;
    for (int t = 0; t < 400; ++t) {
        series.push_back(0.001 * t);
        if (t >= 200) {
            const double pred = f.predict(1).point[0];
            CHECK(std::abs(pred - 0.001 * t) < 0.002);
        }
        f.observe(t, rate(series.back()));
    }
    // Minimum-norm batch fit of y(t) on (1, y(t-1), y(t-2), y(t-3)).
    const int n = static_cast<int>(series.size()) - 3;
    Eigen::MatrixXd X(n, 4);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const int t = i + 3;
        X.row(i) << 1.0, series[t - 1], series[t - 2], series[t - 3];
        y[i] = series[t];
    }
    const Eigen::VectorXd beta = X.completeOrthogonalDecomposition().solve(y);
    Eigen::Vector4d next(1.0, series[399], series[398], series[397]);
    CHECK(std::abs(f.predict(1).point[0] - next.dot(beta)) < 1e-4);
}

TEST_CASE("oracle returns the injected trace") {
    std::vector<double> future{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
    OracleForecaster f(options(), future);
    f.observe(0, rate(0.1));
    const auto p = f.predict(5);
    CHECK(p.point == std::vector<double>{0.2, 0.3, 0.4, 0.5, 0.6});
    CHECK(p.first_slot == 1);
}

TEST_CASE("predictions are never negative") {
    ArForecaster f(options(), 3, 1.0);
    for (int t = 0; t < 60; ++t) {
        f.observe(t, rate(std::max(0.0, 0.5 - 0.01 * t)));
        for (double v : f.predict(5).point) CHECK(v >= 0.0);
    }
    RecurrentForecaster::Settings s;
    s.hidden = 8;
    RecurrentForecaster r(options(), s);
    for (int t = 0; t < 60; ++t) {
        r.observe(t, rate(std::max(0.0, 0.5 - 0.01 * t)));
        for (double v : r.predict(5).point) CHECK(v >= 0.0);
    }
}

TEST_CASE("recurrent forecaster trains online and stays finite") {
    RecurrentForecaster::Settings s;
    s.hidden = 16;
    s.encoder_length = 8;
    RecurrentForecaster f(options(), s);
    for (int t = 0; t < 300; ++t) {
        f.observe(t, rate(0.3 + 0.1 * std::sin(t / 5.0)));
        f.predict(5);
        CHECK(f.model().parameters().allFinite());
    }
    CHECK(f.training_steps() > 250);
    CHECK(f.rejected_steps() == 0);
}

TEST_CASE("every forecaster kind can be built from config") {
    auto config = default_config();
    for (auto k : {ForecasterKind::Recurrent, ForecasterKind::AutoRegressive, ForecasterKind::Oracle,
                   ForecasterKind::LastValue}) {
        config.forecast.kind = k;
        auto f = make_forecaster(config, 0.3, 1, std::vector<double>(10, 0.3));
        f->observe(0, rate(0.3));
        CHECK(f->predict(5).point.size() == 5);
    }
}

TEST_CASE("recurrent forecaster beats last value on eMBB traffic") {
    // Telemetry of the eMBB slice from a seeded reactive run; both forecasters
    // see the same sequence and are scored on slots 1000..4999.
    auto config = default_config();
    config.scenario.controller = ControllerKind::RSO;
    const auto trace = engine::run_scenario(config, ControllerKind::RSO, config.scenario.seed);
    config.forecast.kind = ForecasterKind::Recurrent;
    auto gru = make_forecaster(config, 0.3, 7);
    config.forecast.kind = ForecasterKind::LastValue;
    auto last = make_forecaster(config, 0.3, 7);
    double err_gru = 0.0, err_last = 0.0;
    int n = 0;
    for (std::int64_t t = 0; t + 1 < config.scenario.horizon_slots; ++t) {
        const auto& m = trace.at(t, 0).telemetry;
        gru->observe(t, m);
        last->observe(t, m);
        const double next = trace.at(t + 1, 0).telemetry.lambda;
        const double pg = gru->predict(5).point[0], pl = last->predict(5).point[0];
        if (t + 1 >= 1000) {
            err_gru += std::abs(pg - next);
            err_last += std::abs(pl - next);
            ++n;
        }
    }
    MESSAGE("recurrent MAE " << err_gru / n << ", last value MAE " << err_last / n);
    CHECK(err_gru < err_last);
}
