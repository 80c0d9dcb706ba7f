#include "dtaas/traffic.hpp"

#include <algorithm>
#include <ostream>

#include "dtaas/csv.hpp"

namespace dtaas::traffic {

BurstState burst_step(BurstState state, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double draw = u(rng);
    if (state.in_burst) {
        if (draw < state.exit_prob) state.in_burst = false;
    } else {
        if (draw < state.enter_prob) state.in_burst = true;
    }
    return state;
}

double stationary_burst_probability(const BurstState& state) {
    const double total = state.enter_prob + state.exit_prob;
    if (total <= 0.0) return state.in_burst ? 1.0 : 0.0;
    return state.enter_prob / total;
}

double effective_rate(double base_rate, double load_scale, const BurstState& state, double burst_factor) {
    return base_rate * load_scale * (state.in_burst ? burst_factor : 1.0);
}

std::int64_t sample_arrivals(double rate, double slot_ms, Rng& rng) {
    const double mean = rate * slot_ms;
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::int64_t> poisson(mean);
    return poisson(rng);
}

ChannelState channel_step(ChannelState state, Rng& rng) {
    double noise = 0.0;
    if (state.noise_std > 0.0) {
        std::normal_distribution<double> normal(0.0, state.noise_std);
        noise = normal(rng);
    }
    const double next = state.ar_coeff * state.gamma + (1.0 - state.ar_coeff) * 1.0 + noise;
    state.gamma = std::clamp(next, state.gamma_min, 1.0);
    return state;
}

SliceTrafficSource::SliceTrafficSource(const ScenarioConfig& config, SliceId id, double base_rate,
                                       std::uint64_t master_seed)
    : base_rate_(base_rate),
      load_scale_(config.scenario.load_scale),
      burst_factor_(config.traffic.burst_factor),
      slot_ms_(config.scenario.slot_ms),
      burst_{false, config.traffic.burst_enter_prob, config.traffic.burst_exit_prob},
      channel_{1.0, config.traffic.channel_ar_coeff, config.traffic.channel_noise_std, config.traffic.gamma_min},
      burst_rng_(make_rng(master_seed, static_cast<std::uint64_t>(id), Stream::Burst)),
      arrival_rng_(make_rng(master_seed, static_cast<std::uint64_t>(id), Stream::Arrivals)),
      channel_rng_(make_rng(master_seed, static_cast<std::uint64_t>(id), Stream::Channel)) {}

SlotTraffic SliceTrafficSource::next() {
    burst_ = burst_step(burst_, burst_rng_);
    channel_ = channel_step(channel_, channel_rng_);
    SlotTraffic out;
    out.rate = effective_rate(base_rate_, load_scale_, burst_, burst_factor_);
    out.arrivals = sample_arrivals(out.rate, slot_ms_, arrival_rng_);
    out.in_burst = burst_.in_burst;
    out.gamma = csv::quantize(channel_.gamma);
    return out;
}

SliceClass slice_class(SliceId id) { return kSliceClasses[static_cast<std::size_t>(id) % kSliceClasses.size()]; }

double slice_base_rate(const ScenarioConfig& config, SliceId id) {
    const double share = static_cast<double>(config.scenario.num_slices) / 3.0;
    return config.of(slice_class(id)).base_rate / share;
}

TrafficTrace generate(const ScenarioConfig& config, std::uint64_t master_seed) {
    const int k = config.scenario.num_slices;
    TrafficTrace trace(static_cast<std::size_t>(k));
    for (SliceId id = 0; id < k; ++id) {
        SliceTrafficSource source(config, id, slice_base_rate(config, id), master_seed);
        auto& slots = trace[static_cast<std::size_t>(id)];
        slots.reserve(static_cast<std::size_t>(config.scenario.horizon_slots));
        for (int t = 0; t < config.scenario.horizon_slots; ++t) slots.push_back(source.next());
    }
    return trace;
}

void write_csv(std::ostream& out, const TrafficTrace& trace) {
    csv::Writer w(out);
    w.row("slot", "slice_id", "rate", "arrivals", "in_burst", "gamma");
    const std::size_t slots = trace.empty() ? 0 : trace.front().size();
    for (std::size_t t = 0; t < slots; ++t) {
        for (std::size_t k = 0; k < trace.size(); ++k) {
            const auto& s = trace[k][t];
            w.row(t, k, s.rate, s.arrivals, s.in_burst ? 1 : 0, s.gamma);
        }
    }
}

}  // namespace dtaas::traffic
