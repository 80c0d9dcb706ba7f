#include "dtaas/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

#include "dtaas/csv.hpp"
#include "dtaas/forecast.hpp"
#include "dtaas/netmodel.hpp"
#include "dtaas/rng.hpp"
#include "dtaas/twin.hpp"

namespace dtaas::engine {

namespace {

struct PendingAction {
    std::int64_t decided = 0;
    std::optional<orchestrate::ProvisioningDecision> provision;
    std::optional<orchestrate::ReconfigAction> reconfig;
};

[[noreturn]] void abort_run(std::int64_t slot, const std::string& what) {
    std::ostringstream os;
    os << "invariant violated at slot " << slot << ": " << what;
    throw InvariantViolation(os.str());
}

}  // namespace

std::vector<int> initial_allocation(const ScenarioConfig& config) {
    const auto& net = config.network;
    const int k = config.scenario.num_slices;
    std::vector<int> units(static_cast<std::size_t>(k));
    long total = 0;
    for (int i = 0; i < k; ++i) {
        const auto& cls = config.of(traffic::slice_class(i));
        const double rate = traffic::slice_base_rate(config, i) * config.scenario.load_scale;
        units[static_cast<std::size_t>(i)] =
            netmodel::required_units(rate, cls.sla, net.unit_service_rate, 1.0, net.min_units);
        total += units[static_cast<std::size_t>(i)];
    }
    if (total > net.edge_capacity_units) {
        const double scale = static_cast<double>(net.edge_capacity_units) / static_cast<double>(total);
        for (int& u : units) u = std::max(net.min_units, static_cast<int>(std::floor(u * scale)));
    }
    return units;
}

RunTrace run_scenario(const ScenarioConfig& config, ControllerKind kind, std::uint64_t seed,
                      const RunOptions& options) {
    require_valid(config);
    const auto& net = config.network;
    const int K = config.scenario.num_slices;
    const int T = config.scenario.horizon_slots;
    const double slot_ms = config.scenario.slot_ms;
    const int monitor_delay = config.twin.sync_delay_slots;

    traffic::TrafficTrace generated;
    const traffic::TrafficTrace* traffic = options.traffic;
    if (!traffic) {
        generated = traffic::generate(config, seed);
        traffic = &generated;
    }
    if (static_cast<int>(traffic->size()) != K) throw std::invalid_argument("traffic trace has the wrong slice count");
    for (const auto& s : *traffic) {
        if (static_cast<int>(s.size()) < T) throw std::invalid_argument("traffic trace shorter than the horizon");
    }

    RunTrace trace;
    trace.controller = kind;
    trace.seed = seed;
    trace.num_slices = K;
    trace.horizon_slots = T;
    trace.forecast_horizon = config.forecast.horizon;
    trace.records.reserve(static_cast<std::size_t>(K) * static_cast<std::size_t>(T));

    netmodel::ResourcePool pool(net.edge_capacity_units, net.min_units);
    const auto start = initial_allocation(config);
    std::vector<orchestrate::SliceView> views(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
        if (pool.register_slice(i, start[static_cast<std::size_t>(i)]) != netmodel::AllocStatus::Ok) {
            abort_run(0, "initial allocation does not fit the pool");
        }
        auto& v = views[static_cast<std::size_t>(i)];
        v.id = i;
        v.cls = traffic::slice_class(i);
        v.config = config.of(v.cls);
    }

    auto controller = orchestrate::make_controller(kind, config, seed);
    auto* dtaas = dynamic_cast<orchestrate::DtaasController*>(controller.get());
    if (dtaas && options.audit) dtaas->set_audit(options.audit);

    std::vector<std::unique_ptr<twin::SliceTwin>> twins;
    std::vector<twin::SliceTwin*> twin_ptrs;
    if (dtaas) {
        for (int i = 0; i < K; ++i) {
            const auto& series = (*traffic)[static_cast<std::size_t>(i)];
            std::vector<double> observed(series.size());
            for (std::size_t t = 0; t < series.size(); ++t) observed[t] = csv::quantize(series[t].observed_rate(slot_ms));
            const double default_rate = traffic::slice_base_rate(config, i) * config.scenario.load_scale;
            auto fc = forecast::make_forecaster(config, default_rate,
                                                derive_seed(seed, static_cast<std::uint64_t>(i), Stream::ForecasterInit),
                                                std::move(observed));
            twins.push_back(std::make_unique<twin::SliceTwin>(i, views[static_cast<std::size_t>(i)].config, config,
                                                              std::move(fc)));
            twin_ptrs.push_back(twins.back().get());
        }
    }

    // Telemetry emitted so far, [slice][slot].
    std::vector<std::vector<TelemetryVector>> emitted(static_cast<std::size_t>(K));
    for (auto& e : emitted) e.reserve(static_cast<std::size_t>(T));
    std::int64_t now = 0;
    auto observe_delayed = [&](SliceId id, int delay) -> std::optional<TelemetryVector> {
        const std::int64_t s = now - delay;
        if (s < 0) return std::nullopt;
        return emitted[static_cast<std::size_t>(id)][static_cast<std::size_t>(s)];
    };

    std::multimap<std::int64_t, PendingAction> pending;  // keyed by the slot whose end applies them

    for (std::int64_t t = 0; t < T; ++t) {
        now = t;
        const std::size_t first = trace.records.size();

        // Traffic and network evaluation with the allocation in force.
        for (int i = 0; i < K; ++i) {
            const auto& slot = (*traffic)[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
            auto& v = views[static_cast<std::size_t>(i)];
            v.units = pool.units(i);
            const double lambda = csv::quantize(slot.observed_rate(slot_ms));
            const auto out = netmodel::evaluate(i, lambda, v.units, slot.gamma, v.steering, v.config, net);

            SliceSlotRecord rec;
            rec.slot = t;
            rec.slice = i;
            rec.cls = v.cls;
            rec.rate = slot.rate;
            rec.arrivals = slot.arrivals;
            rec.in_burst = slot.in_burst;
            rec.telemetry = {lambda, csv::quantize(out.utilization), slot.gamma, csv::quantize(out.eta)};
            if (!is_valid(rec.telemetry)) abort_run(t, "telemetry out of range for slice " + std::to_string(i));
            rec.latency_ms = csv::quantize(out.mean_latency_ms);
            rec.units = v.units;
            rec.steering = v.steering;
            rec.compliant = rec.telemetry.eta >= v.config.sla.satisfaction_threshold;
            rec.r_true = netmodel::required_units(lambda, v.config.sla, net.unit_service_rate, slot.gamma, net.min_units);
            emitted[static_cast<std::size_t>(i)].push_back(rec.telemetry);
            trace.records.push_back(std::move(rec));
        }

        // Twins: mirror, forecast, score the one-step prediction.
        if (dtaas) {
            bool all = true;
            double sum = 0.0;
            for (int i = 0; i < K; ++i) {
                auto& tw = *twins[static_cast<std::size_t>(i)];
                auto& rec = trace.records[first + static_cast<std::size_t>(i)];
                tw.sync(t, rec.telemetry);
                const auto& f = tw.refresh_forecast();
                if (auto fid = tw.current_fidelity()) {
                    rec.fidelity = csv::quantize(*fid);
                    sum += *rec.fidelity;
                } else {
                    all = false;
                }
                if (auto pred = tw.predicted_telemetry(t, rec.units, rec.telemetry.gamma, rec.steering)) {
                    rec.prediction_error = csv::quantize(twin::prediction_error(*pred, rec.telemetry, config.twin.rate_scale));
                }
                rec.forecast = f.point;
                rec.residual_std = f.residual_std;
                rec.mirrored_gamma = tw.assumed_gamma();
            }
            trace.aggregate_fidelity.push_back(all ? std::optional<double>(sum) : std::nullopt);
        }

        // Decision on delayed monitoring data.
        for (int i = 0; i < K; ++i) views[static_cast<std::size_t>(i)].observed = observe_delayed(i, monitor_delay);
        orchestrate::ControlInput input;
        input.slot = t;
        input.slices = views;
        input.pool = &pool;
        input.twins = twin_ptrs;
        input.observe_delayed = observe_delayed;
        const auto decision = controller->decide(input);
        if (dtaas) {
            const auto& risk = dtaas->last_risk();
            for (int i = 0; i < K; ++i) trace.records[first + static_cast<std::size_t>(i)].risk = risk[static_cast<std::size_t>(i)];
        }
        const std::int64_t due = t + decision.extra_actuation_delay;
        for (const auto& d : decision.provisioning) pending.insert({due, {t, d, std::nullopt}});
        for (const auto& r : decision.reconfig) pending.insert({due, {t, std::nullopt, r}});

        // Actuation at the end of the slot: releases first, then growth, each in slice order.
        std::vector<PendingAction> batch;
        for (auto it = pending.begin(); it != pending.end() && it->first <= t;) {
            batch.push_back(it->second);
            it = pending.erase(it);
        }
        std::stable_sort(batch.begin(), batch.end(), [](const PendingAction& a, const PendingAction& b) {
            auto rank = [](const PendingAction& p) {
                if (p.reconfig) return 2;
                return p.provision->delta_units > 0 ? 1 : 0;
            };
            const int ra = rank(a), rb = rank(b);
            if (ra != rb) return ra < rb;
            const SliceId sa = a.provision ? a.provision->slice : a.reconfig->slice;
            const SliceId sb = b.provision ? b.provision->slice : b.reconfig->slice;
            return sa < sb;
        });
        for (const auto& action : batch) {
            DecisionRecord log;
            log.slot = action.decided;
            log.controller = kind;
            if (action.provision) {
                const auto& d = *action.provision;
                const int have = pool.units(d.slice);
                int delta = d.delta_units;
                if (delta > 0) delta = std::min(delta, pool.free_units());
                if (delta < 0) delta = std::max(delta, net.min_units - have);
                if (delta != 0 && pool.try_allocate(d.slice, delta) != netmodel::AllocStatus::Ok) {
                    abort_run(t, "clamped allocation rejected for slice " + std::to_string(d.slice));
                }
                log.slice = d.slice;
                log.delta_units = delta;
                log.steering_fraction = views[static_cast<std::size_t>(d.slice)].steering;
                log.trigger = std::string(orchestrate::to_string(d.trigger));
                log.objective_value = d.objective_value;
                log.clamped = d.clamped || delta != d.delta_units;
            } else {
                const auto& r = *action.reconfig;
                views[static_cast<std::size_t>(r.slice)].steering = r.steering_fraction;
                log.slice = r.slice;
                log.steering_fraction = r.steering_fraction;
                log.trigger = "RECONFIG";
                log.objective_value = r.predicted_violation_sum;
            }
            trace.decisions.push_back(std::move(log));
        }
        if (!pool.consistent() || pool.allocated() > pool.capacity()) abort_run(t, "resource pool inconsistent");

        for (int i = 0; i < K; ++i) trace.records[first + static_cast<std::size_t>(i)].units_after = pool.units(i);
    }
    return trace;
}

}  // namespace dtaas::engine
