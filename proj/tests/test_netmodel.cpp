#include <doctest.h>

#include <random>

#include "dtaas/config.hpp"
#include "dtaas/netmodel.hpp"
#include "oracles.hpp"

using namespace dtaas;
using namespace dtaas::netmodel;

TEST_CASE("service rate") {
    CHECK(service_rate(0, 0.02, 1.0) == 0.0);
    CHECK(service_rate(10, 0.02, 1.0) == doctest::Approx(0.2));
    CHECK(service_rate(10, 0.02, 0.5) == doctest::Approx(0.1));
}

TEST_CASE("eta closed form and conventions") {
    CHECK(eta_analytic(0.0, 0.0, 20.0) == 1.0);
    CHECK(eta_analytic(0.0, 5.0, 20.0) == 1.0);
    CHECK(eta_analytic(0.2, 0.2, 20.0) == 0.0);
    CHECK(eta_analytic(0.5, 1.0, 5.0) == doctest::Approx(0.917915).epsilon(1e-6));
}

TEST_CASE("eta matches a discrete-event M/M/1 at the worked example") {
    CHECK(std::abs(oracle::des_mm1_within(0.5, 1.0, 5.0, 1'000'000, 17) - eta_analytic(0.5, 1.0, 5.0)) <= 0.005);
}

TEST_CASE("eta is monotone") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int i = 0; i < 2000; ++i) {
        const double l = u(rng), m = u(rng), th = 1.0 + 20.0 * u(rng), d = 0.1 * u(rng);
        CHECK(eta_analytic(l + d, m, th) <= eta_analytic(l, m, th));
        CHECK(eta_analytic(l, m + d, th) >= eta_analytic(l, m, th));
        CHECK(eta_analytic(l, m, th + d) >= eta_analytic(l, m, th));
    }
}

TEST_CASE("mean latency") {
    CHECK(mean_latency_ms(0.5, 1.0, 0.0, 1000.0) == doctest::Approx(2.0));
    CHECK(mean_latency_ms(0.2, 0.2, 3.0, 1000.0) == 1000.0);
    CHECK(mean_latency_ms(0.0, 1.0, 3.0, 1000.0) == doctest::Approx(4.0));
    // Just below saturation the cap still bounds the value.
    CHECK(mean_latency_ms(0.2, 0.2 + 1e-9, 0.0, 1000.0) == 1000.0);
}

TEST_CASE("utilization") {
    CHECK(utilization(0.1, 0.2) == doctest::Approx(0.5));
    CHECK(utilization(0.3, 0.2) == 1.0);
    CHECK(utilization(0.0, 0.0) == 0.0);
    CHECK(utilization(0.1, 0.0) == 1.0);
}

TEST_CASE("steering mixes local and overflow paths") {
    const auto config = default_config();
    const auto& cls = config.of(SliceClass::URLLC);
    const auto& net = config.network;
    const auto none = evaluate(0, 0.5, 30, 1.0, 0.0, cls, net);
    CHECK(none.eta == doctest::Approx(eta_analytic(0.5, 0.6, 5.0)));
    CHECK(none.compliant == (none.eta >= 0.95));
    const auto some = evaluate(0, 0.5, 30, 1.0, 0.3, cls, net);
    const double eta_o = 1.0 - std::exp(-0.5 * (5.0 - 2.0));
    CHECK(some.eta == doctest::Approx(0.7 * eta_analytic(0.35, 0.6, 5.0) + 0.3 * eta_o));
    CHECK(some.mean_latency_ms == doctest::Approx(0.7 * (0.5 + 1.0 / 0.25) + 0.3 * (0.5 + 2.0 + 2.0)));
    CHECK(some.utilization == doctest::Approx(0.35 / 0.6));
}

TEST_CASE("required units are minimal") {
    SLASpec sla{5.0, 0.95, 0.8};
    CHECK(required_units(0.0, sla, 0.02, 1.0, 1) == 1);
    CHECK(required_units(0.5, sla, 0.02, 1.0, 1) == 55);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        SLASpec s{1.0 + 49.0 * u(rng), 0.5 + 0.49 * u(rng), 0.8};
        const double lambda = u(rng), gamma = 0.3 + 0.7 * u(rng);
        CHECK(required_units(lambda, s, 0.02, gamma, 1) ==
              oracle::scan_units(lambda, s.satisfaction_threshold, s.latency_threshold_ms, 0.02, gamma, 1));
    }
}

TEST_CASE("pool boundaries") {
    ResourcePool pool(100, 1);
    REQUIRE(pool.register_slice(0, 50) == AllocStatus::Ok);
    REQUIRE(pool.register_slice(1, 40) == AllocStatus::Ok);
    CHECK(pool.try_allocate(0, 11) == AllocStatus::CapacityExceeded);
    CHECK(pool.allocated() == 90);
    CHECK(pool.try_allocate(0, 10) == AllocStatus::Ok);
    CHECK(pool.allocated() == 100);
    CHECK(pool.try_allocate(2, 1) == AllocStatus::UnknownSlice);

    ResourcePool small(10, 1);
    REQUIRE(small.register_slice(0, 1) == AllocStatus::Ok);
    CHECK(small.try_allocate(0, -1) == AllocStatus::BelowMinimum);
    CHECK(small.units(0) == 1);
}

TEST_CASE("pool conservation under random operation sequences") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const int cap = 20 + static_cast<int>(rng() % 100);
        ResourcePool pool(cap, 1);
        const int k = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < k; ++i) pool.register_slice(i, 1 + static_cast<int>(rng() % 5));
        for (int step = 0; step < 300; ++step) {
            const SliceId id = static_cast<SliceId>(rng() % (k + 1));
            const int delta = static_cast<int>(rng() % 41) - 20;
            const auto before = pool.allocations();
            const int total = pool.allocated();
            const auto status = pool.try_allocate(id, delta);
            if (status == AllocStatus::Ok) {
                CHECK(pool.units(id) == before.at(id) + delta);
            } else {
                CHECK(pool.allocations() == before);
                CHECK(pool.allocated() == total);
            }
            CHECK(pool.consistent());
            CHECK(pool.allocated() <= cap);
        }
    }
}
