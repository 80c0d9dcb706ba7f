#include "dtaas/trace_io.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "dtaas/csv.hpp"

namespace dtaas::trace_io {

namespace {

std::string cell(const std::optional<double>& v) { return v ? csv::format_real(*v) : std::string(); }

std::optional<double> optional_real(const csv::Table& t, std::size_t row, std::string_view column) {
    if (t.text(row, column).empty()) return std::nullopt;
    return t.real(row, column);
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

void write_file(const std::filesystem::path& path, const engine::RunTrace& trace,
                void (*writer)(std::ostream&, const engine::RunTrace&)) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    writer(out, trace);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_trace(std::ostream& out, const engine::RunTrace& trace) {
    csv::Writer w(out);
    w.row("slot", "slice_id", "class", "rate", "arrivals", "in_burst", "gamma", "lambda", "rho", "eta", "latency_ms",
          "units", "units_after", "steering", "compliant", "r_true");
    for (const auto& r : trace.records) {
        w.row(r.slot, r.slice, to_string(r.cls), r.rate, r.arrivals, r.in_burst, r.telemetry.gamma, r.telemetry.lambda,
              r.telemetry.rho, r.telemetry.eta, r.latency_ms, r.units, r.units_after, r.steering, r.compliant,
              r.r_true);
    }
}

void write_decisions(std::ostream& out, const engine::RunTrace& trace) {
    csv::Writer w(out);
    w.row("slot", "controller", "slice_id", "delta_units", "steering_fraction", "trigger", "objective_value",
          "clamped_flag");
    for (const auto& d : trace.decisions) {
        w.row(d.slot, to_string(d.controller), d.slice, d.delta_units, d.steering_fraction, d.trigger,
              d.objective_value, d.clamped);
    }
}

void write_twins(std::ostream& out, const engine::RunTrace& trace) {
    csv::Writer w(out);
    std::vector<std::string> header{"slot", "slice_id", "fidelity", "prediction_error", "risk"};
    for (int j = 1; j <= trace.forecast_horizon; ++j) header.push_back("forecast_" + std::to_string(j));
    header.push_back("residual_std");
    header.push_back("mirrored_gamma");
    w.row(header);
    for (const auto& r : trace.records) {
        std::vector<std::string> row{std::to_string(r.slot), std::to_string(r.slice), cell(r.fidelity),
                                     cell(r.prediction_error), cell(r.risk)};
        for (int j = 0; j < trace.forecast_horizon; ++j) {
            row.push_back(j < static_cast<int>(r.forecast.size()) ? csv::format_real(r.forecast[static_cast<std::size_t>(j)])
                                                                  : std::string());
        }
        row.push_back(cell(r.residual_std));
        row.push_back(cell(r.mirrored_gamma));
        w.row(row);
    }
}

engine::RunTrace read_trace(std::istream& trace_in, std::istream& decisions_in, std::istream* twins_in) {
    engine::RunTrace trace;
    const auto t = csv::Table::read(trace_in);
    int max_slice = -1;
    std::int64_t max_slot = -1;
    for (std::size_t i = 0; i < t.size(); ++i) {
        engine::SliceSlotRecord r;
        r.slot = t.integer(i, "slot");
        r.slice = static_cast<SliceId>(t.integer(i, "slice_id"));
        const auto cls = parse_slice_class(t.text(i, "class"));
        if (!cls) throw std::runtime_error("trace row " + std::to_string(i + 1) + ": unknown class");
        r.cls = *cls;
        r.rate = t.real(i, "rate");
        r.arrivals = t.integer(i, "arrivals");
        r.in_burst = t.integer(i, "in_burst") != 0;
        r.telemetry = {t.real(i, "lambda"), t.real(i, "rho"), t.real(i, "gamma"), t.real(i, "eta")};
        r.latency_ms = t.real(i, "latency_ms");
        r.units = static_cast<int>(t.integer(i, "units"));
        r.units_after = static_cast<int>(t.integer(i, "units_after"));
        r.steering = t.real(i, "steering");
        r.compliant = t.integer(i, "compliant") != 0;
        r.r_true = static_cast<int>(t.integer(i, "r_true"));
        max_slice = std::max(max_slice, r.slice);
        max_slot = std::max(max_slot, r.slot);
        trace.records.push_back(std::move(r));
    }
    trace.num_slices = max_slice + 1;
    trace.horizon_slots = static_cast<int>(max_slot + 1);
    if (trace.records.size() != static_cast<std::size_t>(trace.num_slices) * static_cast<std::size_t>(trace.horizon_slots)) {
        throw std::runtime_error("trace is not a complete slot x slice grid");
    }
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const auto& r = trace.records[i];
        if (r.slot * trace.num_slices + r.slice != static_cast<std::int64_t>(i)) {
            throw std::runtime_error("trace rows out of order at row " + std::to_string(i + 1));
        }
    }

    const auto d = csv::Table::read(decisions_in);
    for (std::size_t i = 0; i < d.size(); ++i) {
        engine::DecisionRecord r;
        r.slot = d.integer(i, "slot");
        const auto c = parse_controller(d.text(i, "controller"));
        if (!c) throw std::runtime_error("decision row " + std::to_string(i + 1) + ": unknown controller");
        r.controller = *c;
        r.slice = static_cast<SliceId>(d.integer(i, "slice_id"));
        r.delta_units = static_cast<int>(d.integer(i, "delta_units"));
        r.steering_fraction = d.real(i, "steering_fraction");
        r.trigger = d.text(i, "trigger");
        r.objective_value = d.real(i, "objective_value");
        r.clamped = d.integer(i, "clamped_flag") != 0;
        trace.decisions.push_back(std::move(r));
    }
    if (!trace.decisions.empty()) trace.controller = trace.decisions.front().controller;

    if (twins_in) {
        const auto w = csv::Table::read(*twins_in);
        if (w.size() != trace.records.size()) throw std::runtime_error("twin log and trace differ in length");
        int h = 0;
        while (w.has("forecast_" + std::to_string(h + 1))) ++h;
        trace.forecast_horizon = h;
        trace.controller = ControllerKind::DTAAS;
        trace.aggregate_fidelity.assign(static_cast<std::size_t>(trace.horizon_slots), std::nullopt);
        for (std::size_t i = 0; i < w.size(); ++i) {
            auto& r = trace.records[i];
            if (w.integer(i, "slot") != r.slot || w.integer(i, "slice_id") != r.slice) {
                throw std::runtime_error("twin log row " + std::to_string(i + 1) + " does not match the trace");
            }
            r.fidelity = optional_real(w, i, "fidelity");
            r.prediction_error = optional_real(w, i, "prediction_error");
            r.risk = optional_real(w, i, "risk");
            r.forecast.clear();
            for (int j = 1; j <= h; ++j) {
                if (auto v = optional_real(w, i, "forecast_" + std::to_string(j))) r.forecast.push_back(*v);
            }
            r.residual_std = optional_real(w, i, "residual_std");
            r.mirrored_gamma = optional_real(w, i, "mirrored_gamma");
        }
        for (int s = 0; s < trace.horizon_slots; ++s) {
            double sum = 0.0;
            bool all = true;
            for (int k = 0; k < trace.num_slices; ++k) {
                const auto& f = trace.at(s, k).fidelity;
                if (!f) {
                    all = false;
                    break;
                }
                sum += *f;
            }
            if (all) trace.aggregate_fidelity[static_cast<std::size_t>(s)] = sum;
        }
    }
    return trace;
}

std::string trace_file(ControllerKind c, std::uint64_t seed) {
    return "trace_" + lower(to_string(c)) + "_" + std::to_string(seed) + ".csv";
}
std::string decisions_file(ControllerKind c, std::uint64_t seed) {
    return "decisions_" + lower(to_string(c)) + "_" + std::to_string(seed) + ".csv";
}
std::string twins_file(ControllerKind c, std::uint64_t seed) {
    return "twins_" + lower(to_string(c)) + "_" + std::to_string(seed) + ".csv";
}

void write_run(const std::string& dir, const engine::RunTrace& trace) {
    const std::filesystem::path base(dir);
    std::filesystem::create_directories(base);
    write_file(base / trace_file(trace.controller, trace.seed), trace, write_trace);
    write_file(base / decisions_file(trace.controller, trace.seed), trace, write_decisions);
    if (trace.controller == ControllerKind::DTAAS) {
        write_file(base / twins_file(trace.controller, trace.seed), trace, write_twins);
    }
}

}  // namespace dtaas::trace_io
