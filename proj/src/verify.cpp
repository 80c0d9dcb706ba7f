#include "dtaas/verify.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "dtaas/csv.hpp"
#include "dtaas/experiment.hpp"
#include "dtaas/metrics.hpp"
#include "dtaas/orchestrate.hpp"
#include "dtaas/trace_io.hpp"
#include "dtaas/traffic.hpp"
#include "dtaas/twin.hpp"

namespace dtaas::verify {

std::string Mismatch::message() const {
    std::ostringstream os;
    os << file;
    if (line) os << " line " << line;
    os << ": " << what;
    return os.str();
}

namespace {

bool same_written(double recomputed, double written) {
    if (std::isnan(recomputed) || std::isnan(written)) return std::isnan(recomputed) && std::isnan(written);
    return csv::quantize(recomputed) == written;
}

std::string describe(double reported, double recomputed) {
    return "reported " + csv::format_real(reported) + ", recomputed " + csv::format_real(recomputed);
}

}  // namespace

std::vector<Mismatch> replay_decisions(const ScenarioConfig& config, const engine::RunTrace& trace,
                                       const std::string& decisions_file) {
    std::vector<Mismatch> out;
    const auto& net = config.network;
    const int K = trace.num_slices;

    for (std::int64_t t = 0; t < trace.horizon_slots; ++t) {
        int sum = 0;
        for (int k = 0; k < K; ++k) sum += trace.at(t, k).units;
        if (sum > net.edge_capacity_units) {
            out.push_back({decisions_file, 0, "slot " + std::to_string(t) + ": allocations exceed capacity"});
        }
    }
    if (trace.controller != ControllerKind::DTAAS) return out;

    const int delay = config.twin.sync_delay_slots;
    const int interval = config.twin.update_interval_slots;
    for (std::int64_t t = 0; t < trace.horizon_slots; ++t) {
        for (int k = 0; k < K; ++k) {
            const auto& rec = trace.at(t, k);
            // Newest refresh slot not after t whose delayed sample exists.
            std::optional<std::int64_t> mirror;
            for (std::int64_t s = t; s >= 0; --s) {
                if (s % interval == 0 && s - delay >= 0) {
                    mirror = s - delay;
                    break;
                }
            }
            if (!mirror != !rec.fidelity ||
                (mirror && csv::quantize(twin::fidelity(rec.telemetry, trace.at(*mirror, k).telemetry,
                                                        config.twin.rate_scale)) != *rec.fidelity)) {
                out.push_back({decisions_file, 0,
                               "fidelity of slice " + std::to_string(k) + " at slot " + std::to_string(t) +
                                   " does not match the trace"});
            }
        }
    }

    // Free capacity seen by each decision: capacity minus the allocations in
    // force, minus what lower slice ids took in the same slot. The log is in
    // actuation order (releases first), not decision order.
    std::map<std::int64_t, std::vector<std::pair<SliceId, int>>> same_slot;
    for (const auto& d : trace.decisions) {
        if (d.trigger != "RECONFIG") same_slot[d.slot].push_back({d.slice, d.delta_units});
    }
    for (std::size_t i = 0; i < trace.decisions.size(); ++i) {
        const auto& d = trace.decisions[i];
        const std::size_t line = i + 2;
        if (d.slot < 0 || d.slot >= trace.horizon_slots || d.slice < 0 || d.slice >= K) {
            out.push_back({decisions_file, line, "slot or slice out of range"});
            continue;
        }
        const auto& rec = trace.at(d.slot, d.slice);
        if (rec.forecast.empty() || !rec.residual_std || !rec.mirrored_gamma) {
            out.push_back({decisions_file, line, "no twin log entry for the decision"});
            continue;
        }
        const auto& cls = config.of(rec.cls);
        const twin::RiskSampler sampler(rec.forecast, *rec.residual_std, config.twin.risk_samples,
                                        twin::risk_seed(trace.seed, d.slice, d.slot));
        int in_force = 0;
        for (int k = 0; k < K; ++k) in_force += trace.at(d.slot, k).units;
        int used = 0;
        for (const auto& [slice, delta] : same_slot[d.slot]) {
            if (slice < d.slice) used += delta;
        }

        if (d.trigger == "RECONFIG") {
            const int units = rec.units_after;
            const double chosen = sampler.violation_sum(units, d.steering_fraction, *rec.mirrored_gamma, cls, net);
            if (!same_written(chosen, d.objective_value)) {
                out.push_back({decisions_file, line, "steering objective " + describe(d.objective_value, chosen)});
            }
            if (d.steering_fraction > 0.0) {
                for (double phi : orchestrate::kSteeringCandidates) {
                    if (sampler.violation_sum(units, phi, *rec.mirrored_gamma, cls, net) < chosen) {
                        out.push_back({decisions_file, line, "steering fraction is not the minimizer"});
                        break;
                    }
                }
            }
            continue;
        }

        if (d.trigger == std::string(orchestrate::to_string(orchestrate::Trigger::SafetyThreshold))) {
            orchestrate::ProvisionProblem p;
            p.current_units = rec.units;
            p.lowest_delta = net.min_units - rec.units;
            p.highest_delta = net.edge_capacity_units - in_force - used;
            p.capacity = net.edge_capacity_units;
            p.alpha = config.dtaas.alpha;
            p.beta = config.dtaas.beta;
            p.gamma = *rec.mirrored_gamma;
            p.mode = config.twin.risk_mode;
            p.cls = cls;
            p.net = net;
            const double lambda_hat = orchestrate::demand_estimate(rec.forecast, p.mode);
            const int needed =
                netmodel::required_units(lambda_hat, cls.sla, net.unit_service_rate, p.gamma, net.min_units);
            const double logged = orchestrate::provision_objective(p, sampler, needed, d.delta_units);
            if (!same_written(logged, d.objective_value)) {
                out.push_back({decisions_file, line, "objective " + describe(d.objective_value, logged)});
            }
            if (needed <= p.capacity) {
                for (int delta = p.lowest_delta; delta <= p.highest_delta; ++delta) {
                    const double j = orchestrate::provision_objective(p, sampler, needed, delta);
                    if (j < logged || (j == logged && delta < d.delta_units)) {
                        out.push_back({decisions_file, line,
                                       "delta " + std::to_string(d.delta_units) + " is not the minimizer (delta " +
                                           std::to_string(delta) + " scores " + csv::format_real(j) + ")"});
                        break;
                    }
                }
            }
        }
    }
    return out;
}

std::vector<Mismatch> verify_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path base(dir);
    std::vector<Mismatch> out;
    const auto config = load_config((base / "config.ini").string());

    std::ifstream report_in(base / "report.csv");
    if (!report_in) throw std::runtime_error("cannot open " + (base / "report.csv").string());
    const auto report = csv::Table::read(report_in);

    std::set<ControllerKind> controllers;
    for (std::size_t i = 0; i < report.size(); ++i) {
        const auto c = parse_controller(report.text(i, "controller"));
        if (!c) throw std::runtime_error("report.csv line " + std::to_string(i + 2) + ": unknown controller");
        controllers.insert(*c);
    }

    std::map<ControllerKind, std::vector<metrics::RunMetrics>> runs;
    for (auto c : controllers) {
        for (int r = 0; r < config.scenario.repetitions; ++r) {
            const auto seed = experiment::repetition_seed(config, r);
            const auto tpath = base / trace_io::trace_file(c, seed);
            const auto dpath = base / trace_io::decisions_file(c, seed);
            std::ifstream tin(tpath), din(dpath);
            if (!tin || !din) throw std::runtime_error("missing trace files for " + std::string(to_string(c)) +
                                                       " seed " + std::to_string(seed));
            std::ifstream win;
            if (c == ControllerKind::DTAAS) {
                win.open(base / trace_io::twins_file(c, seed));
                if (!win) throw std::runtime_error("missing twin log for seed " + std::to_string(seed));
            }
            auto trace = trace_io::read_trace(tin, din, c == ControllerKind::DTAAS ? &win : nullptr);
            trace.controller = c;
            trace.seed = seed;
            trace.forecast_horizon = config.forecast.horizon;
            for (auto& m : replay_decisions(config, trace, dpath.filename().string())) out.push_back(std::move(m));
            runs[c].push_back(metrics::run_metrics(trace));
        }
    }
    const auto recomputed = metrics::build_report(runs);

    for (std::size_t i = 0; i < report.size(); ++i) {
        const auto c = *parse_controller(report.text(i, "controller"));
        const auto& scope = report.text(i, "slice_id");
        const auto& metric = report.text(i, "metric");
        const auto* row = recomputed.find(c, scope, metric);
        const std::string label = std::string(to_string(c)) + "," + scope + "," + metric;
        if (!row) {
            out.push_back({"report.csv", i + 2, label + ": no such KPI in the traces"});
            continue;
        }
        const double mean = report.real(i, "mean");
        const double stdv = report.real(i, "std");
        if (!same_written(row->summary.mean, mean)) {
            out.push_back({"report.csv", i + 2, label + " mean " + describe(mean, row->summary.mean)});
        }
        if (!same_written(row->summary.std, stdv)) {
            out.push_back({"report.csv", i + 2, label + " std " + describe(stdv, row->summary.std)});
        }
        if (report.integer(i, "n") != row->summary.n) {
            out.push_back({"report.csv", i + 2, label + " n does not match the number of runs"});
        }
    }
    if (report.size() != recomputed.rows.size()) {
        out.push_back({"report.csv", 0, "row count " + std::to_string(report.size()) + ", expected " +
                                            std::to_string(recomputed.rows.size())});
    }
    return out;
}

}  // namespace dtaas::verify
