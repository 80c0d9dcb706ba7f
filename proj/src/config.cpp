#include "dtaas/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace dtaas {

namespace {

std::string format_double(double v) {
    // Shortest text that parses back to the same double.
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
    std::string tmp(s);
    if (tmp.empty()) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || errno == ERANGE) return std::nullopt;
    return v;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
    Int v{};
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return v;
}

struct Field {
    std::string section;
    std::string key;
    std::function<std::string(const ScenarioConfig&)> get;
    // Returns a description of the expected form on parse failure.
    std::function<std::optional<std::string>(ScenarioConfig&, std::string_view)> set;

    std::string path() const { return section + "." + key; }
};

template <typename T>
using Accessor = std::function<T&(ScenarioConfig&)>;

template <typename T>
Field make_number(std::string section, std::string key, Accessor<T> at) {
    Field f{std::move(section), std::move(key), {}, {}};
    f.get = [at](const ScenarioConfig& c) {
        auto& mut = const_cast<ScenarioConfig&>(c);
        if constexpr (std::is_floating_point_v<T>) {
            return format_double(at(mut));
        } else {
            return std::to_string(at(mut));
        }
    };
    f.set = [at](ScenarioConfig& c, std::string_view text) -> std::optional<std::string> {
        if constexpr (std::is_floating_point_v<T>) {
            auto v = parse_double(text);
            if (!v) return "a real number";
            at(c) = *v;
        } else {
            auto v = parse_int<T>(text);
            if (!v) return "an integer";
            at(c) = *v;
        }
        return std::nullopt;
    };
    return f;
}

template <typename E>
Field make_enum(std::string section, std::string key, Accessor<E> at,
                std::function<std::optional<E>(std::string_view)> parse, std::string choices) {
    Field f{std::move(section), std::move(key), {}, {}};
    f.get = [at](const ScenarioConfig& c) {
        return std::string(to_string(at(const_cast<ScenarioConfig&>(c))));
    };
    f.set = [at, parse, choices](ScenarioConfig& c, std::string_view text) -> std::optional<std::string> {
        auto v = parse(text);
        if (!v) return "one of " + choices;
        at(c) = *v;
        return std::nullopt;
    };
    return f;
}

std::string class_section(SliceClass c) {
    std::string name(to_string(c));
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return "slice." + name;
}

const std::vector<Field>& schema() {
    static const std::vector<Field> fields = [] {
        std::vector<Field> f;
#define DTAAS_NUM(T, sec, key, member) \
    f.push_back(make_number<T>(sec, key, [](ScenarioConfig& c) -> T& { return c.member; }))
        DTAAS_NUM(int, "scenario", "horizon_slots", scenario.horizon_slots);
        DTAAS_NUM(int, "scenario", "repetitions", scenario.repetitions);
        DTAAS_NUM(std::uint64_t, "scenario", "seed", scenario.seed);
        DTAAS_NUM(double, "scenario", "load_scale", scenario.load_scale);
        DTAAS_NUM(int, "scenario", "num_slices", scenario.num_slices);
        DTAAS_NUM(double, "scenario", "slot_ms", scenario.slot_ms);
        f.push_back(make_enum<ControllerKind>(
            "scenario", "controller", [](ScenarioConfig& c) -> ControllerKind& { return c.scenario.controller; },
            parse_controller, "DTAAS, RSO, CDRL"));

        DTAAS_NUM(double, "traffic", "burst_factor", traffic.burst_factor);
        DTAAS_NUM(double, "traffic", "burst_enter_prob", traffic.burst_enter_prob);
        DTAAS_NUM(double, "traffic", "burst_exit_prob", traffic.burst_exit_prob);
        DTAAS_NUM(double, "traffic", "channel_ar_coeff", traffic.channel_ar_coeff);
        DTAAS_NUM(double, "traffic", "channel_noise_std", traffic.channel_noise_std);
        DTAAS_NUM(double, "traffic", "gamma_min", traffic.gamma_min);

        DTAAS_NUM(int, "network", "edge_capacity_units", network.edge_capacity_units);
        DTAAS_NUM(int, "network", "min_units", network.min_units);
        DTAAS_NUM(double, "network", "unit_service_rate", network.unit_service_rate);
        DTAAS_NUM(double, "network", "latency_cap_ms", network.latency_cap_ms);
        DTAAS_NUM(double, "network", "steering_penalty_ms", network.steering_penalty_ms);
        DTAAS_NUM(double, "network", "overflow_margin", network.overflow_margin);

        for (SliceClass sc : kSliceClasses) {
            const auto i = index_of(sc);
            const auto sec = class_section(sc);
            f.push_back(make_number<double>(sec, "base_rate",
                                            [i](ScenarioConfig& c) -> double& { return c.classes[i].base_rate; }));
            f.push_back(make_number<double>(sec, "transport_core_offset_ms", [i](ScenarioConfig& c) -> double& {
                return c.classes[i].transport_core_offset_ms;
            }));
            f.push_back(make_number<double>(sec, "latency_threshold_ms", [i](ScenarioConfig& c) -> double& {
                return c.classes[i].sla.latency_threshold_ms;
            }));
            f.push_back(make_number<double>(sec, "satisfaction_threshold", [i](ScenarioConfig& c) -> double& {
                return c.classes[i].sla.satisfaction_threshold;
            }));
            f.push_back(make_number<double>(sec, "safety_fraction", [i](ScenarioConfig& c) -> double& {
                return c.classes[i].sla.safety_fraction;
            }));
        }

        DTAAS_NUM(int, "twin", "update_interval_slots", twin.update_interval_slots);
        DTAAS_NUM(int, "twin", "sync_delay_slots", twin.sync_delay_slots);
        DTAAS_NUM(int, "twin", "risk_samples", twin.risk_samples);
        f.push_back(make_enum<RiskMode>(
            "twin", "risk_mode", [](ScenarioConfig& c) -> RiskMode& { return c.twin.risk_mode; }, parse_risk_mode,
            "final_step, horizon_mean"));
        DTAAS_NUM(double, "twin", "rate_scale", twin.rate_scale);

        f.push_back(make_enum<ForecasterKind>(
            "forecast", "kind", [](ScenarioConfig& c) -> ForecasterKind& { return c.forecast.kind; },
            parse_forecaster, "recurrent, ar, oracle, last_value"));
        f.push_back(make_enum<FeatureSet>(
            "forecast", "features", [](ScenarioConfig& c) -> FeatureSet& { return c.forecast.features; },
            parse_feature_set, "full, lambda_only"));
        DTAAS_NUM(int, "forecast", "horizon", forecast.horizon);
        DTAAS_NUM(int, "forecast", "history_window", forecast.history_window);
        DTAAS_NUM(int, "forecast", "hidden_size", forecast.hidden_size);
        DTAAS_NUM(int, "forecast", "encoder_length", forecast.encoder_length);
        DTAAS_NUM(double, "forecast", "learning_rate", forecast.learning_rate);
        DTAAS_NUM(double, "forecast", "residual_decay", forecast.residual_decay);
        DTAAS_NUM(double, "forecast", "initial_residual_std", forecast.initial_residual_std);
        DTAAS_NUM(double, "forecast", "min_residual_std", forecast.min_residual_std);
        DTAAS_NUM(int, "forecast", "warmup_observations", forecast.warmup_observations);
        DTAAS_NUM(int, "forecast", "ar_order", forecast.ar_order);
        DTAAS_NUM(double, "forecast", "rls_forgetting", forecast.rls_forgetting);

        DTAAS_NUM(double, "dtaas", "alpha", dtaas.alpha);
        DTAAS_NUM(double, "dtaas", "beta", dtaas.beta);
        DTAAS_NUM(double, "dtaas", "release_fraction", dtaas.release_fraction);
        DTAAS_NUM(int, "dtaas", "release_persist_slots", dtaas.release_persist_slots);
        DTAAS_NUM(double, "dtaas", "reconfig_risk_threshold", dtaas.reconfig_risk_threshold);

        DTAAS_NUM(int, "rso", "step_units", rso.step_units);
        DTAAS_NUM(double, "rso", "low_utilization", rso.low_utilization);
        DTAAS_NUM(int, "rso", "persist_slots", rso.persist_slots);

        DTAAS_NUM(int, "cdrl", "period_slots", cdrl.period_slots);
        DTAAS_NUM(int, "cdrl", "observation_delay_slots", cdrl.observation_delay_slots);
        DTAAS_NUM(double, "cdrl", "demand_decay", cdrl.demand_decay);
        DTAAS_NUM(double, "cdrl", "headroom", cdrl.headroom);
        DTAAS_NUM(int, "cdrl", "slices_per_extra_delay", cdrl.slices_per_extra_delay);
#undef DTAAS_NUM
        return f;
    }();
    return fields;
}

const Field* find_field(std::string_view section, std::string_view key) {
    for (const auto& f : schema()) {
        if (f.section == section && f.key == key) return &f;
    }
    return nullptr;
}

class Checker {
  public:
    explicit Checker(const ScenarioConfig& c) : config_(c) {}

    void require(std::string_view path, bool ok, const char* constraint) {
        if (ok) return;
        std::string value = "?";
        const auto dot = path.rfind('.');
        if (const auto* f = find_field(path.substr(0, dot), path.substr(dot + 1))) value = f->get(config_);
        errors_.push_back({std::string(path), value, constraint});
    }

    std::vector<FieldError> take() { return std::move(errors_); }

  private:
    const ScenarioConfig& config_;
    std::vector<FieldError> errors_;
};

bool finite(double v) { return std::isfinite(v); }

}  // namespace

ScenarioConfig default_config() {
    ScenarioConfig c;
    c.of(SliceClass::eMBB) = {0.30, 3.0, default_sla(SliceClass::eMBB)};
    c.of(SliceClass::URLLC) = {0.10, 0.5, default_sla(SliceClass::URLLC)};
    c.of(SliceClass::mMTC) = {0.20, 5.0, default_sla(SliceClass::mMTC)};
    return c;
}

std::string FieldError::message() const { return field + " = " + value + ": " + constraint; }

namespace {
std::string join_errors(const std::vector<FieldError>& errors) {
    std::string out = "invalid configuration";
    for (const auto& e : errors) out += "\n  " + e.message();
    return out;
}
}  // namespace

ConfigError::ConfigError(std::vector<FieldError> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

std::vector<FieldError> validate(const ScenarioConfig& c) {
    Checker k(c);
    const auto& s = c.scenario;
    k.require("scenario.horizon_slots", s.horizon_slots >= 0, "must be >= 0");
    k.require("scenario.repetitions", s.repetitions >= 1, "must be >= 1");
    k.require("scenario.load_scale", finite(s.load_scale) && s.load_scale > 0, "must be > 0");
    k.require("scenario.num_slices", s.num_slices >= 1, "must be >= 1");
    k.require("scenario.slot_ms", finite(s.slot_ms) && s.slot_ms > 0, "must be > 0");

    const auto& t = c.traffic;
    k.require("traffic.burst_factor", finite(t.burst_factor) && t.burst_factor >= 1.0, "must be >= 1");
    k.require("traffic.burst_enter_prob", t.burst_enter_prob >= 0 && t.burst_enter_prob <= 1, "must be in [0, 1]");
    k.require("traffic.burst_exit_prob", t.burst_exit_prob >= 0 && t.burst_exit_prob <= 1, "must be in [0, 1]");
    k.require("traffic.channel_ar_coeff", t.channel_ar_coeff > 0 && t.channel_ar_coeff < 1, "must be in (0, 1)");
    k.require("traffic.channel_noise_std", finite(t.channel_noise_std) && t.channel_noise_std >= 0, "must be >= 0");
    k.require("traffic.gamma_min", t.gamma_min > 0 && t.gamma_min <= 1, "must be in (0, 1]");

    const auto& n = c.network;
    k.require("network.edge_capacity_units", n.edge_capacity_units >= 1, "must be >= 1");
    k.require("network.min_units", n.min_units >= 0, "must be >= 0");
    k.require("network.min_units",
              static_cast<long long>(n.min_units) * s.num_slices <= n.edge_capacity_units,
              "min_units * num_slices must not exceed edge_capacity_units");
    k.require("network.unit_service_rate", finite(n.unit_service_rate) && n.unit_service_rate > 0, "must be > 0");
    k.require("network.steering_penalty_ms", finite(n.steering_penalty_ms) && n.steering_penalty_ms >= 0,
              "must be >= 0");
    k.require("network.overflow_margin", finite(n.overflow_margin) && n.overflow_margin > 0, "must be > 0");

    double max_offset = 0.0;
    for (SliceClass sc : kSliceClasses) {
        const auto& cls = c.of(sc);
        const auto sec = class_section(sc);
        k.require(sec + ".base_rate", finite(cls.base_rate) && cls.base_rate >= 0, "must be >= 0");
        k.require(sec + ".transport_core_offset_ms",
                  finite(cls.transport_core_offset_ms) && cls.transport_core_offset_ms >= 0, "must be >= 0");
        k.require(sec + ".latency_threshold_ms",
                  finite(cls.sla.latency_threshold_ms) && cls.sla.latency_threshold_ms > 0, "must be > 0");
        k.require(sec + ".satisfaction_threshold",
                  cls.sla.satisfaction_threshold > 0 && cls.sla.satisfaction_threshold < 1, "must be in (0, 1)");
        k.require(sec + ".safety_fraction", cls.sla.safety_fraction > 0 && cls.sla.safety_fraction <= 1,
                  "must be in (0, 1]");
        if (finite(cls.transport_core_offset_ms)) max_offset = std::max(max_offset, cls.transport_core_offset_ms);
    }
    k.require("network.latency_cap_ms", finite(n.latency_cap_ms) && n.latency_cap_ms > max_offset,
              "must exceed every transport_core_offset_ms");

    const auto& tw = c.twin;
    k.require("twin.update_interval_slots", tw.update_interval_slots >= 1, "must be >= 1");
    k.require("twin.sync_delay_slots", tw.sync_delay_slots >= 0, "must be >= 0");
    k.require("twin.risk_samples", tw.risk_samples >= 1, "must be >= 1");
    k.require("twin.rate_scale", finite(tw.rate_scale) && tw.rate_scale > 0, "must be > 0");

    const auto& f = c.forecast;
    k.require("forecast.horizon", f.horizon >= 1, "must be >= 1");
    k.require("forecast.history_window", f.history_window >= 1, "must be >= 1");
    k.require("forecast.hidden_size", f.hidden_size >= 1, "must be >= 1");
    k.require("forecast.encoder_length", f.encoder_length >= 1, "must be >= 1");
    k.require("forecast.encoder_length", f.encoder_length + f.horizon <= f.history_window,
              "encoder_length + horizon must not exceed history_window");
    k.require("forecast.learning_rate", finite(f.learning_rate) && f.learning_rate > 0, "must be > 0");
    k.require("forecast.residual_decay", f.residual_decay > 0 && f.residual_decay < 1, "must be in (0, 1)");
    k.require("forecast.initial_residual_std", finite(f.initial_residual_std) && f.initial_residual_std >= 0,
              "must be >= 0");
    k.require("forecast.min_residual_std", finite(f.min_residual_std) && f.min_residual_std >= 0, "must be >= 0");
    k.require("forecast.warmup_observations", f.warmup_observations >= 1, "must be >= 1");
    k.require("forecast.ar_order", f.ar_order >= 1, "must be >= 1");
    k.require("forecast.rls_forgetting", f.rls_forgetting > 0 && f.rls_forgetting <= 1, "must be in (0, 1]");

    const auto& d = c.dtaas;
    k.require("dtaas.alpha", finite(d.alpha) && d.alpha >= 0, "must be >= 0");
    k.require("dtaas.beta", finite(d.beta) && d.beta >= 0, "must be >= 0");
    k.require("dtaas.release_fraction", d.release_fraction > 0 && d.release_fraction <= 1, "must be in (0, 1]");
    k.require("dtaas.release_persist_slots", d.release_persist_slots >= 1, "must be >= 1");
    k.require("dtaas.reconfig_risk_threshold", d.reconfig_risk_threshold >= 0 && d.reconfig_risk_threshold <= 1,
              "must be in [0, 1]");

    const auto& r = c.rso;
    k.require("rso.step_units", r.step_units >= 1, "must be >= 1");
    k.require("rso.low_utilization", r.low_utilization >= 0 && r.low_utilization <= 1, "must be in [0, 1]");
    k.require("rso.persist_slots", r.persist_slots >= 1, "must be >= 1");

    const auto& cd = c.cdrl;
    k.require("cdrl.period_slots", cd.period_slots >= 1, "must be >= 1");
    k.require("cdrl.observation_delay_slots", cd.observation_delay_slots >= 0, "must be >= 0");
    k.require("cdrl.demand_decay", cd.demand_decay >= 0 && cd.demand_decay < 1, "must be in [0, 1)");
    k.require("cdrl.headroom", finite(cd.headroom) && cd.headroom > 0, "must be > 0");
    k.require("cdrl.slices_per_extra_delay", cd.slices_per_extra_delay >= 1, "must be >= 1");
    return k.take();
}

const ScenarioConfig& require_valid(const ScenarioConfig& config) {
    auto errors = validate(config);
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return config;
}

std::string serialize(const ScenarioConfig& config) {
    std::ostringstream out;
    std::string current;
    for (const auto& f : schema()) {
        if (f.section != current) {
            if (!current.empty()) out << '\n';
            out << '[' << f.section << "]\n";
            current = f.section;
        }
        out << f.key << " = " << f.get(config) << '\n';
    }
    return out.str();
}

ScenarioConfig parse_config(std::string_view text) {
    ScenarioConfig config = default_config();
    std::vector<FieldError> errors;
    std::set<std::string> seen;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        auto line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back({where, std::string(line), "malformed section header"});
                continue;
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            const bool known = std::any_of(schema().begin(), schema().end(),
                                           [&](const Field& f) { return f.section == section; });
            if (!known) errors.push_back({section, where, "unknown section"});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            errors.push_back({where, std::string(line), "expected key = value"});
            continue;
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const std::string path = section + "." + std::string(key);
        const auto* f = find_field(section, key);
        if (f == nullptr) {
            errors.push_back({path, std::string(value), "unknown key (" + where + ")"});
            continue;
        }
        if (!seen.insert(path).second) {
            errors.push_back({path, std::string(value), "duplicate key (" + where + ")"});
            continue;
        }
        if (auto expected = f->set(config, value)) {
            errors.push_back({path, std::string(value), "expected " + *expected});
        }
        if (eol == text.size()) break;
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return require_valid(config);
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({{"file", path, "cannot open scenario file"}});
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void apply_override(ScenarioConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError({{std::string(assignment), "", "override must be key=value"}});
    }
    const auto name = trim(assignment.substr(0, eq));
    const auto value = trim(assignment.substr(eq + 1));
    const Field* match = nullptr;
    int matches = 0;
    for (const auto& f : schema()) {
        if (f.path() == name) {
            match = &f;
            matches = 1;
            break;
        }
        if (f.key == name) {
            match = &f;
            ++matches;
        }
    }
    if (matches == 0) throw ConfigError({{std::string(name), std::string(value), "unknown key"}});
    if (matches > 1) {
        throw ConfigError({{std::string(name), std::string(value), "ambiguous key; use the dotted section path"}});
    }
    if (auto expected = match->set(config, value)) {
        throw ConfigError({{match->path(), std::string(value), "expected " + *expected}});
    }
}

std::vector<std::string> field_paths() {
    std::vector<std::string> out;
    for (const auto& f : schema()) out.push_back(f.path());
    return out;
}

}  // namespace dtaas
