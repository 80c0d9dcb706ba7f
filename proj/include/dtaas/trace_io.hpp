#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "dtaas/engine.hpp"

namespace dtaas::trace_io {

/// slot, slice_id, class, rate, arrivals, in_burst, gamma, lambda, rho, eta,
/// latency_ms, units, units_after, steering, compliant, r_true
void write_trace(std::ostream& out, const engine::RunTrace& trace);

/// slot, controller, slice_id, delta_units, steering_fraction, trigger,
/// objective_value, clamped_flag
void write_decisions(std::ostream& out, const engine::RunTrace& trace);

/// slot, slice_id, fidelity, prediction_error, risk, forecast_1..forecast_h,
/// residual_std, mirrored_gamma. Missing values are empty cells.
void write_twins(std::ostream& out, const engine::RunTrace& trace);

/// Rebuilds a trace from its files. `twins` may be null for controllers
/// without twins. Throws std::runtime_error on malformed input.
engine::RunTrace read_trace(std::istream& trace, std::istream& decisions, std::istream* twins);

/// File names used inside an output directory.
std::string trace_file(ControllerKind c, std::uint64_t seed);
std::string decisions_file(ControllerKind c, std::uint64_t seed);
std::string twins_file(ControllerKind c, std::uint64_t seed);

/// Writes the three files of a run into `dir`.
void write_run(const std::string& dir, const engine::RunTrace& trace);

}  // namespace dtaas::trace_io
