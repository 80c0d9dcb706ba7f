#pragma once

#include <string>
#include <vector>

#include "dtaas/config.hpp"
#include "dtaas/engine.hpp"

namespace dtaas::verify {

struct Mismatch {
    std::string file;
    std::size_t line = 0;  // 1-based line in `file`, header is line 1; 0 when not row-specific
    std::string what;

    std::string message() const;
};

/// Replays every logged twin-driven decision of a trace: the objective value
/// of each gated provisioning decision is recomputed from the twin log and
/// checked to be the exhaustive minimum; every steering action is checked to
/// minimize the predicted violation sum. Also checks pool conservation and the
/// fidelity log against the trace.
std::vector<Mismatch> replay_decisions(const ScenarioConfig& config, const engine::RunTrace& trace,
                                       const std::string& decisions_file);

/// Recomputes every KPI of an output directory (config.ini, report.csv and the
/// per-run traces) and compares it with report.csv at written precision.
std::vector<Mismatch> verify_directory(const std::string& dir);

}  // namespace dtaas::verify
