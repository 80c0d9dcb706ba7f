#include "dtaas/metrics.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "dtaas/csv.hpp"

namespace dtaas::metrics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool selected(const engine::SliceSlotRecord& r, std::optional<SliceId> slice) { return !slice || r.slice == *slice; }

template <typename Get>
double optional_mean(Records records, std::optional<SliceId> slice, Get get) {
    double sum = 0.0;
    long n = 0;
    for (const auto& r : records) {
        if (!selected(r, slice)) continue;
        if (const auto& v = get(r)) {
            sum += *v;
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : kNaN;
}

}  // namespace

double compliance_pct(Records records, std::optional<SliceId> slice) {
    long ok = 0, n = 0;
    for (const auto& r : records) {
        if (!selected(r, slice)) continue;
        ++n;
        ok += r.compliant;
    }
    return n ? 100.0 * static_cast<double>(ok) / static_cast<double>(n) : kNaN;
}

double over_provisioning_pct(Records records, std::optional<SliceId> slice) {
    long over = 0, need = 0;
    for (const auto& r : records) {
        if (!selected(r, slice)) continue;
        over += std::max(0, r.units - r.r_true);
        need += r.r_true;
    }
    return need ? 100.0 * static_cast<double>(over) / static_cast<double>(need) : kNaN;
}

double avg_latency_ms(Records records, std::optional<SliceId> slice) {
    double weighted = 0.0;
    long arrivals = 0;
    for (const auto& r : records) {
        if (!selected(r, slice)) continue;
        weighted += static_cast<double>(r.arrivals) * r.latency_ms;
        arrivals += r.arrivals;
    }
    return arrivals ? weighted / static_cast<double>(arrivals) : kNaN;
}

double mean_fidelity(Records records, std::optional<SliceId> slice) {
    return optional_mean(records, slice, [](const auto& r) -> const std::optional<double>& { return r.fidelity; });
}

double mean_prediction_error(Records records, std::optional<SliceId> slice) {
    return optional_mean(records, slice,
                         [](const auto& r) -> const std::optional<double>& { return r.prediction_error; });
}

double mean_aggregate_fidelity(const std::vector<std::optional<double>>& per_slot) {
    double sum = 0.0;
    long n = 0;
    for (const auto& v : per_slot) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : kNaN;
}

RunMetrics run_metrics(const engine::RunTrace& trace) {
    RunMetrics m;
    const Records recs = trace.records;
    const bool twins = trace.controller == ControllerKind::DTAAS;
    auto fill = [&](const std::string& scope, std::optional<SliceId> slice) {
        m[{scope, kCompliance}] = compliance_pct(recs, slice);
        m[{scope, kOverProvisioning}] = over_provisioning_pct(recs, slice);
        m[{scope, kLatency}] = avg_latency_ms(recs, slice);
        if (twins) {
            m[{scope, kPredictionError}] = mean_prediction_error(recs, slice);
            m[{scope, slice ? kFidelity : kAggregateFidelity}] =
                slice ? mean_fidelity(recs, slice) : mean_aggregate_fidelity(trace.aggregate_fidelity);
        }
    };
    fill("all", std::nullopt);
    for (int k = 0; k < trace.num_slices; ++k) fill(std::to_string(k), k);
    return m;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    s.n = static_cast<int>(values.size());
    if (values.empty()) return {kNaN, kNaN, 0};
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / s.n;
    if (s.n > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(sq / (s.n - 1));
    }
    return s;
}

const ReportRow* Report::find(ControllerKind c, const std::string& scope, const std::string& metric) const {
    for (const auto& r : rows) {
        if (r.controller == c && r.scope == scope && r.metric == metric) return &r;
    }
    return nullptr;
}

double Report::mean(ControllerKind c, const std::string& metric, const std::string& scope) const {
    const auto* row = find(c, scope, metric);
    if (!row) throw std::out_of_range("no report row for " + std::string(to_string(c)) + "/" + scope + "/" + metric);
    return row->summary.mean;
}

Report build_report(const std::map<ControllerKind, std::vector<RunMetrics>>& runs) {
    Report report;
    for (const auto& [controller, reps] : runs) {
        if (reps.empty()) continue;
        // Keep "all" first, then slices numerically, metrics in a fixed order.
        std::vector<std::string> scopes{"all"};
        std::set<int> slices;
        for (const auto& [key, _] : reps.front()) {
            if (key.first != "all") slices.insert(std::stoi(key.first));
        }
        for (int s : slices) scopes.push_back(std::to_string(s));
        const char* order[] = {kCompliance, kOverProvisioning, kLatency, kAggregateFidelity, kFidelity, kPredictionError};
        for (const auto& scope : scopes) {
            for (const char* metric : order) {
                if (!reps.front().count({scope, metric})) continue;
                ReportRow row{controller, scope, metric, {}, {}};
                for (const auto& rep : reps) row.values.push_back(rep.at({scope, metric}));
                row.summary = summarize(row.values);
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

void write_report_csv(std::ostream& out, const Report& report) {
    csv::Writer w(out);
    w.row("controller", "slice_id", "metric", "mean", "std", "n");
    for (const auto& r : report.rows) {
        w.row(to_string(r.controller), r.scope, r.metric, r.summary.mean, r.summary.std, r.summary.n);
    }
}

}  // namespace dtaas::metrics
