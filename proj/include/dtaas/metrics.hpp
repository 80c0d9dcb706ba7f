#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dtaas/engine.hpp"
#include "dtaas/types.hpp"

namespace dtaas::metrics {

using Records = std::span<const engine::SliceSlotRecord>;

/// Share of slice-slots with eta >= threshold, in percent. `slice` restricts
/// to one slice; otherwise all slices are pooled.
double compliance_pct(Records records, std::optional<SliceId> slice = std::nullopt);

/// 100 * sum(max(0, units - r_true)) / sum(r_true); NaN when no units are required.
double over_provisioning_pct(Records records, std::optional<SliceId> slice = std::nullopt);

/// Arrival-weighted mean latency in ms; NaN without arrivals.
double avg_latency_ms(Records records, std::optional<SliceId> slice = std::nullopt);

/// Means over slice-slots that carry the value; NaN when none does.
double mean_fidelity(Records records, std::optional<SliceId> slice = std::nullopt);
double mean_prediction_error(Records records, std::optional<SliceId> slice = std::nullopt);

/// Mean over slots of the summed fidelity of all twins (slots where every twin has a mirror).
double mean_aggregate_fidelity(const std::vector<std::optional<double>>& per_slot);

inline constexpr const char* kCompliance = "sla_compliance_pct";
inline constexpr const char* kOverProvisioning = "over_provisioning_pct";
inline constexpr const char* kLatency = "avg_latency_ms";
inline constexpr const char* kFidelity = "mean_fidelity";
inline constexpr const char* kAggregateFidelity = "mean_aggregate_fidelity";
inline constexpr const char* kPredictionError = "mean_prediction_error";

/// (scope, metric) -> value, where scope is "all" or a slice id.
using RunMetrics = std::map<std::pair<std::string, std::string>, double>;

RunMetrics run_metrics(const engine::RunTrace& trace);

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, 0 for a single value
    int n = 0;
};

Summary summarize(const std::vector<double>& values);

struct ReportRow {
    ControllerKind controller = ControllerKind::DTAAS;
    std::string scope;
    std::string metric;
    std::vector<double> values;  // one per repetition
    Summary summary;
};

struct Report {
    std::vector<ReportRow> rows;

    const ReportRow* find(ControllerKind c, const std::string& scope, const std::string& metric) const;
    /// Mean of a row; throws std::out_of_range when absent.
    double mean(ControllerKind c, const std::string& metric, const std::string& scope = "all") const;
};

Report build_report(const std::map<ControllerKind, std::vector<RunMetrics>>& runs);

/// Columns: controller, slice_id, metric, mean, std, n.
void write_report_csv(std::ostream& out, const Report& report);

}  // namespace dtaas::metrics
