#include "dtaas/orchestrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dtaas::orchestrate {

int r_needed(double lambda_hat, const SLASpec& sla, double unit_rate, double gamma, int min_units,
             int capacity_units) {
    const int r = netmodel::required_units(lambda_hat, sla, unit_rate, gamma, min_units);
    if (r > capacity_units) throw Unsatisfiable(r);
    return r;
}

double sla_rate_capacity(int units, double gamma, const SLASpec& sla, double unit_rate) {
    const double mu = netmodel::service_rate(units, unit_rate, gamma);
    return std::max(0.0, mu + std::log(1.0 - sla.satisfaction_threshold) / sla.latency_threshold_ms);
}

std::string_view to_string(Trigger t) {
    switch (t) {
        case Trigger::SafetyThreshold: return "SAFETY_THRESHOLD";
        case Trigger::SlaBreach: return "SLA_BREACH";
        case Trigger::Periodic: return "PERIODIC";
        case Trigger::None: return "NONE";
    }
    return "?";
}

double demand_estimate(const std::vector<double>& point, RiskMode mode) {
    if (point.empty()) return 0.0;
    if (mode == RiskMode::FinalStep) return point.back();
    double sum = 0.0;
    for (double v : point) sum += v;
    return sum / static_cast<double>(point.size());
}

double provision_objective(const ProvisionProblem& p, const twin::RiskSampler& sampler, int needed, int delta) {
    const int units = p.current_units + delta;
    const double over = std::max(0, units - needed);
    const double risk = sampler.risk(units, 0.0, p.gamma, p.cls, p.net, p.mode);
    return p.alpha * over / static_cast<double>(p.capacity) + p.beta * risk;
}

ProvisionResult dtaas_provision(const ProvisionProblem& p, const twin::RiskSampler& sampler, int slice) {
    ProvisionResult out;
    out.decision.slice = slice;
    out.decision.trigger = Trigger::SafetyThreshold;
    const double lambda_hat = demand_estimate(sampler.point(), p.mode);
    const int needed = netmodel::required_units(lambda_hat, p.cls.sla, p.net.unit_service_rate, p.gamma,
                                                p.net.min_units);
    if (needed > p.capacity) {
        out.decision.delta_units = std::max(p.highest_delta, p.lowest_delta);
        out.decision.clamped = true;
        out.decision.objective_value = provision_objective(p, sampler, needed, out.decision.delta_units);
    } else {
        out.needed = needed;
        double best = std::numeric_limits<double>::infinity();
        int best_delta = 0;
        for (int d = p.lowest_delta; d <= p.highest_delta; ++d) {
            const double j = provision_objective(p, sampler, needed, d);
            if (j < best) {
                best = j;
                best_delta = d;
            }
        }
        out.decision.delta_units = best_delta;
        out.decision.objective_value = best;
    }
    out.risk_after = sampler.risk(p.current_units + out.decision.delta_units, 0.0, p.gamma, p.cls, p.net, p.mode);
    return out;
}

ReconfigAction dtaas_reconfigure(SliceId slice, int units, double gamma, const SliceClassSection& cls,
                                 const NetworkSection& net, const twin::RiskSampler& sampler) {
    ReconfigAction best{slice, 0.0, std::numeric_limits<double>::infinity()};
    for (double phi : kSteeringCandidates) {
        const double v = sampler.violation_sum(units, phi, gamma, cls, net);
        if (v < best.predicted_violation_sum) best = {slice, phi, v};
    }
    return best;
}

DtaasController::DtaasController(const ScenarioConfig& config, std::uint64_t run_seed)
    : config_(config),
      run_seed_(run_seed),
      release_count_(static_cast<std::size_t>(config.scenario.num_slices), 0),
      last_risk_(static_cast<std::size_t>(config.scenario.num_slices)) {}

ControlOutput DtaasController::decide(const ControlInput& input) {
    ControlOutput out;
    netmodel::ResourcePool pool = *input.pool;
    const auto& net = config_.network;
    for (std::size_t i = 0; i < input.slices.size(); ++i) {
        const auto& view = input.slices[i];
        auto* tw = input.twins[i];
        const auto& f = tw->last_forecast();
        last_risk_[i].reset();
        if (!f || f->point.empty()) continue;

        const int r = pool.units(view.id);
        const double gamma = tw->assumed_gamma();
        const double capacity = sla_rate_capacity(r, gamma, view.config.sla, net.unit_service_rate);
        const double peak = *std::max_element(f->point.begin(), f->point.end());
        const std::uint64_t seed = twin::risk_seed(run_seed_, view.id, input.slot);
        const twin::RiskSampler sampler(*f, config_.twin.risk_samples, seed);

        ProvisioningDecision decision{view.id, 0, Trigger::None, 0.0, false};
        auto& streak = release_count_[i];
        const bool gated = peak > view.config.sla.safety_fraction * capacity;
        if (gated) {
            streak = 0;
            ProvisionProblem p;
            p.current_units = r;
            p.lowest_delta = net.min_units - r;
            p.highest_delta = pool.free_units();
            p.capacity = net.edge_capacity_units;
            p.alpha = config_.dtaas.alpha;
            p.beta = config_.dtaas.beta;
            p.gamma = gamma;
            p.mode = config_.twin.risk_mode;
            p.cls = view.config;
            p.net = net;
            auto result = dtaas_provision(p, sampler, view.id);
            decision = result.decision;
            if (audit_) {
                audit_({input.slot, view.id, p, f->point, f->residual_std, seed, config_.twin.risk_samples, result});
            }
        } else if (peak < config_.dtaas.release_fraction * capacity) {
            if (++streak >= config_.dtaas.release_persist_slots) {
                streak = 0;
                const int target =
                    netmodel::required_units(peak, view.config.sla, net.unit_service_rate, gamma, net.min_units) + 1;
                if (target < r) decision = {view.id, target - r, Trigger::Periodic, 0.0, false};
            }
        } else {
            streak = 0;
        }

        if (decision.delta_units != 0) {
            if (pool.try_allocate(view.id, decision.delta_units) != netmodel::AllocStatus::Ok) {
                throw std::logic_error("twin-driven decision outside the feasible range");
            }
        }
        if (decision.trigger != Trigger::None) out.provisioning.push_back(decision);

        // Steering only backs up provisioning that could not bring the risk down.
        const int units_after = r + decision.delta_units;
        const double risk = sampler.risk(units_after, 0.0, gamma, view.config, net, config_.twin.risk_mode);
        last_risk_[i] = risk;
        if (gated && risk >= config_.dtaas.reconfig_risk_threshold) {
            out.reconfig.push_back(dtaas_reconfigure(view.id, units_after, gamma, view.config, net, sampler));
        } else if (view.steering > 0.0) {
            out.reconfig.push_back({view.id, 0.0, sampler.violation_sum(units_after, 0.0, gamma, view.config, net)});
        }
    }
    return out;
}

ProvisioningDecision rso_decide(SliceId slice, const TelemetryVector& observed, const SLASpec& sla,
                                const RsoSection& rso, RsoState& state) {
    if (observed.eta < sla.satisfaction_threshold) {
        state.low_streak = 0;
        return {slice, rso.step_units, Trigger::SlaBreach, 0.0, false};
    }
    if (observed.rho < rso.low_utilization) {
        if (++state.low_streak >= rso.persist_slots) {
            state.low_streak = 0;
            return {slice, -1, Trigger::Periodic, 0.0, false};
        }
        return {slice, 0, Trigger::None, 0.0, false};
    }
    state.low_streak = 0;
    return {slice, 0, Trigger::None, 0.0, false};
}

RsoController::RsoController(const ScenarioConfig& config)
    : config_(config), state_(static_cast<std::size_t>(config.scenario.num_slices)) {}

ControlOutput RsoController::decide(const ControlInput& input) {
    ControlOutput out;
    for (std::size_t i = 0; i < input.slices.size(); ++i) {
        const auto& view = input.slices[i];
        if (!view.observed) continue;
        auto d = rso_decide(view.id, *view.observed, view.config.sla, config_.rso, state_[i]);
        if (d.trigger != Trigger::None) out.provisioning.push_back(d);
    }
    return out;
}

double demand_units(double smoothed_rate, const SLASpec& sla, double unit_rate, double gamma) {
    const double mu_req = std::max(0.0, smoothed_rate) - std::log(1.0 - sla.satisfaction_threshold) /
                                                           sla.latency_threshold_ms;
    return mu_req / (unit_rate * gamma);
}

std::vector<int> cdrl_targets(std::span<const double> demand, double headroom, int capacity, int min_units) {
    std::vector<double> raw(demand.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < demand.size(); ++i) {
        raw[i] = headroom * demand[i];
        sum += raw[i];
    }
    std::vector<int> out(demand.size());
    const bool oversubscribed = sum > static_cast<double>(capacity);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double v = oversubscribed ? raw[i] * static_cast<double>(capacity) / sum : raw[i];
        out[i] = std::max(min_units, static_cast<int>(std::floor(v)));
    }
    return out;
}

CdrlController::CdrlController(const ScenarioConfig& config)
    : config_(config),
      smoothed_(static_cast<std::size_t>(config.scenario.num_slices)),
      gamma_(static_cast<std::size_t>(config.scenario.num_slices), 1.0) {}

ControlOutput CdrlController::decide(const ControlInput& input) {
    ControlOutput out;
    const auto& cd = config_.cdrl;
    for (std::size_t i = 0; i < input.slices.size(); ++i) {
        const auto obs = input.observe_delayed(input.slices[i].id, cd.observation_delay_slots);
        if (!obs) continue;
        auto& s = smoothed_[i];
        s = s ? cd.demand_decay * *s + (1.0 - cd.demand_decay) * obs->lambda : obs->lambda;
        gamma_[i] = obs->gamma;
    }
    if (input.slot % cd.period_slots != 0) return out;
    if (std::any_of(smoothed_.begin(), smoothed_.end(), [](const auto& s) { return !s.has_value(); })) return out;

    const auto& net = config_.network;
    std::vector<double> demand(input.slices.size());
    for (std::size_t i = 0; i < input.slices.size(); ++i) {
        demand[i] = demand_units(*smoothed_[i], input.slices[i].config.sla, net.unit_service_rate, gamma_[i]);
    }
    const auto targets = cdrl_targets(demand, cd.headroom, net.edge_capacity_units, net.min_units);
    for (std::size_t i = 0; i < input.slices.size(); ++i) {
        const int delta = targets[i] - input.slices[i].units;
        if (delta != 0) out.provisioning.push_back({input.slices[i].id, delta, Trigger::Periodic, 0.0, false});
    }
    out.extra_actuation_delay = static_cast<int>(input.slices.size()) / cd.slices_per_extra_delay;
    return out;
}

std::unique_ptr<Controller> make_controller(ControllerKind kind, const ScenarioConfig& config,
                                            std::uint64_t run_seed) {
    switch (kind) {
        case ControllerKind::DTAAS: return std::make_unique<DtaasController>(config, run_seed);
        case ControllerKind::RSO: return std::make_unique<RsoController>(config);
        case ControllerKind::CDRL: return std::make_unique<CdrlController>(config);
    }
    throw std::logic_error("unknown controller kind");
}

}  // namespace dtaas::orchestrate
