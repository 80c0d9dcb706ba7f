#include "dtaas/netmodel.hpp"

#include <algorithm>
#include <cmath>

namespace dtaas::netmodel {

double service_rate(int units, double unit_rate, double gamma) {
    return static_cast<double>(units) * unit_rate * gamma;
}

double eta_analytic(double lambda, double mu, double latency_threshold_ms) {
    if (lambda <= 0.0) return 1.0;
    if (lambda >= mu) return 0.0;
    return 1.0 - std::exp(-(mu - lambda) * latency_threshold_ms);
}

double mean_latency_ms(double lambda, double mu, double offset_ms, double cap_ms) {
    if (lambda < mu) return std::min(offset_ms + 1.0 / (mu - lambda), cap_ms);
    return cap_ms;
}

double utilization(double lambda, double mu) {
    if (mu <= 0.0) return lambda > 0.0 ? 1.0 : 0.0;
    return std::min(lambda / mu, 1.0);
}

double eta_overflow(double latency_threshold_ms, double penalty_ms, double margin) {
    if (latency_threshold_ms <= penalty_ms) return 0.0;
    return 1.0 - std::exp(-margin * (latency_threshold_ms - penalty_ms));
}

double overflow_latency_ms(double offset_ms, double penalty_ms, double margin) {
    return offset_ms + penalty_ms + 1.0 / margin;
}

SlotOutcome evaluate(SliceId slice, double lambda, int units, double gamma, double steering,
                     const SliceClassSection& cls, const NetworkSection& net) {
    SlotOutcome out;
    out.slice = slice;
    out.offered_rate = lambda;
    out.service_rate = service_rate(units, net.unit_service_rate, gamma);
    const double local = (1.0 - steering) * lambda;
    const double threshold = cls.sla.latency_threshold_ms;
    const double eta_local = eta_analytic(local, out.service_rate, threshold);
    const double lat_local =
        mean_latency_ms(local, out.service_rate, cls.transport_core_offset_ms, net.latency_cap_ms);
    if (steering > 0.0) {
        const double eta_o = eta_overflow(threshold, net.steering_penalty_ms, net.overflow_margin);
        const double lat_o =
            overflow_latency_ms(cls.transport_core_offset_ms, net.steering_penalty_ms, net.overflow_margin);
        out.eta = (1.0 - steering) * eta_local + steering * eta_o;
        out.mean_latency_ms = (1.0 - steering) * lat_local + steering * lat_o;
    } else {
        out.eta = eta_local;
        out.mean_latency_ms = lat_local;
    }
    out.utilization = utilization(local, out.service_rate);
    out.compliant = out.eta >= cls.sla.satisfaction_threshold;
    return out;
}

int required_units(double lambda, const SLASpec& sla, double unit_rate, double gamma, int min_units) {
    if (lambda <= 0.0) return min_units;
    const double per_unit = unit_rate * gamma;
    const double mu_req = lambda - std::log(1.0 - sla.satisfaction_threshold) / sla.latency_threshold_ms;
    int r = std::max(min_units, static_cast<int>(std::ceil(mu_req / per_unit)));
    auto meets = [&](int units) {
        return eta_analytic(lambda, service_rate(units, unit_rate, gamma), sla.latency_threshold_ms) >=
               sla.satisfaction_threshold;
    };
    // The closed form can land one off at an exact boundary; settle against eta itself.
    while (!meets(r)) ++r;
    while (r > min_units && meets(r - 1)) --r;
    return r;
}

const char* to_string(AllocStatus s) {
    switch (s) {
        case AllocStatus::Ok: return "ok";
        case AllocStatus::CapacityExceeded: return "capacity exceeded";
        case AllocStatus::BelowMinimum: return "below minimum";
        case AllocStatus::UnknownSlice: return "unknown slice";
    }
    return "?";
}

AllocStatus ResourcePool::register_slice(SliceId id, int units) {
    if (units < min_units_) return AllocStatus::BelowMinimum;
    if (total_ + units > capacity_) return AllocStatus::CapacityExceeded;
    auto [it, inserted] = allocations_.emplace(id, units);
    if (!inserted) return AllocStatus::UnknownSlice;
    total_ += units;
    return AllocStatus::Ok;
}

AllocStatus ResourcePool::try_allocate(SliceId id, int delta_units) {
    auto it = allocations_.find(id);
    if (it == allocations_.end()) return AllocStatus::UnknownSlice;
    const long long next = static_cast<long long>(it->second) + delta_units;
    if (next < min_units_) return AllocStatus::BelowMinimum;
    if (static_cast<long long>(total_) + delta_units > capacity_) return AllocStatus::CapacityExceeded;
    it->second = static_cast<int>(next);
    total_ += delta_units;
    return AllocStatus::Ok;
}

int ResourcePool::units(SliceId id) const {
    auto it = allocations_.find(id);
    return it == allocations_.end() ? 0 : it->second;
}

bool ResourcePool::consistent() const {
    long long sum = 0;
    for (const auto& [id, u] : allocations_) {
        if (u < min_units_) return false;
        sum += u;
    }
    return sum == total_ && sum <= capacity_;
}

}  // namespace dtaas::netmodel
