#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dtaas/config.hpp"
#include "dtaas/rng.hpp"
#include "dtaas/types.hpp"

namespace dtaas::traffic {

/// Two-state burst modulation of a Poisson source.
struct BurstState {
    bool in_burst = false;
    double enter_prob = 0.05;
    double exit_prob = 0.2;
};

/// Mean-reverting AR(1) channel quality, clamped to [gamma_min, 1].
struct ChannelState {
    double gamma = 1.0;
    double ar_coeff = 0.9;
    double noise_std = 0.02;
    double gamma_min = 0.3;
};

BurstState burst_step(BurstState state, Rng& rng);

double stationary_burst_probability(const BurstState& state);

/// base_rate * load_scale, multiplied by burst_factor while in a burst.
double effective_rate(double base_rate, double load_scale, const BurstState& state, double burst_factor);

/// Poisson count with mean rate * slot_ms.
std::int64_t sample_arrivals(double rate, double slot_ms, Rng& rng);

ChannelState channel_step(ChannelState state, Rng& rng);

/// One slot of generated workload for one slice.
struct SlotTraffic {
    double rate = 0.0;  // req/ms, the Poisson mean this slot
    std::int64_t arrivals = 0;
    bool in_burst = false;
    double gamma = 1.0;

    double observed_rate(double slot_ms) const { return static_cast<double>(arrivals) / slot_ms; }
};

/// Generator for one slice. Owns its three streams (burst, arrivals, channel),
/// each derived from the master seed and the slice id.
class SliceTrafficSource {
  public:
    SliceTrafficSource(const ScenarioConfig& config, SliceId id, double base_rate, std::uint64_t master_seed);

    /// Advances burst and channel state, then samples this slot's arrivals.
    SlotTraffic next();

  private:
    double base_rate_;
    double load_scale_;
    double burst_factor_;
    double slot_ms_;
    BurstState burst_;
    ChannelState channel_;
    Rng burst_rng_;
    Rng arrival_rng_;
    Rng channel_rng_;
};

/// Pre-generated traffic for every slice: [slice][slot].
using TrafficTrace = std::vector<std::vector<SlotTraffic>>;

/// Base rate of slice `id` when `num_slices` slices share the class rates: classes
/// cycle eMBB, URLLC, mMTC and each rate is divided by num_slices / 3.
double slice_base_rate(const ScenarioConfig& config, SliceId id);
SliceClass slice_class(SliceId id);

TrafficTrace generate(const ScenarioConfig& config, std::uint64_t master_seed);

/// CSV columns: slot, slice_id, rate, arrivals, in_burst, gamma.
void write_csv(std::ostream& out, const TrafficTrace& trace);

}  // namespace dtaas::traffic
