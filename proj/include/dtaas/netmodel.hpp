#pragma once

#include <map>
#include <vector>

#include "dtaas/config.hpp"
#include "dtaas/types.hpp"

namespace dtaas::netmodel {

/// mu = units * c * gamma (req/ms). Steering is applied by the caller to the offered load.
double service_rate(int units, double unit_rate, double gamma);

/// P[sojourn <= threshold] for an M/M/1 queue. 1 when idle, 0 when saturated.
double eta_analytic(double lambda, double mu, double latency_threshold_ms);

/// offset + 1/(mu - lambda) below saturation, cap_ms otherwise.
double mean_latency_ms(double lambda, double mu, double offset_ms, double cap_ms);

/// lambda/mu clamped to 1; 1 when mu = 0 < lambda; 0 when both are 0.
double utilization(double lambda, double mu);

/// Satisfaction of steered traffic: served with `margin` req/ms of spare rate
/// and delayed by a fixed penalty.
double eta_overflow(double latency_threshold_ms, double penalty_ms, double margin);
double overflow_latency_ms(double offset_ms, double penalty_ms, double margin);

/// Per-slot result of serving one slice.
struct SlotOutcome {
    SliceId slice = 0;
    double offered_rate = 0.0;  // total lambda before steering
    double service_rate = 0.0;  // local mu
    double eta = 1.0;
    double mean_latency_ms = 0.0;
    double utilization = 0.0;
    bool compliant = true;
};

/// Evaluates one slot. A share `steering` of the traffic goes to the overflow
/// pool; eta and latency are the steering-weighted mixture of both paths.
SlotOutcome evaluate(SliceId slice, double lambda, int units, double gamma, double steering,
                     const SliceClassSection& cls, const NetworkSection& net);

/// Smallest r >= min_units whose eta at lambda reaches the satisfaction threshold,
/// with no capacity bound. Consistent with eta_analytic at integer boundaries.
int required_units(double lambda, const SLASpec& sla, double unit_rate, double gamma, int min_units);

enum class AllocStatus { Ok, CapacityExceeded, BelowMinimum, UnknownSlice };

const char* to_string(AllocStatus s);

/// Shared edge resource pool. Sum of allocations never exceeds capacity and no
/// allocation drops under min_units; failed operations leave it untouched.
class ResourcePool {
  public:
    ResourcePool(int capacity_units, int min_units) : capacity_(capacity_units), min_units_(min_units) {}

    AllocStatus register_slice(SliceId id, int units);
    AllocStatus try_allocate(SliceId id, int delta_units);

    int capacity() const { return capacity_; }
    int min_units() const { return min_units_; }
    int allocated() const { return total_; }
    int free_units() const { return capacity_ - total_; }
    int units(SliceId id) const;
    bool contains(SliceId id) const { return allocations_.count(id) != 0; }
    const std::map<SliceId, int>& allocations() const { return allocations_; }

    /// Recomputes the invariants from scratch.
    bool consistent() const;

  private:
    int capacity_;
    int min_units_;
    int total_ = 0;
    std::map<SliceId, int> allocations_;
};

}  // namespace dtaas::netmodel
