#include "dtaas/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include "dtaas/config.hpp"
#include "dtaas/csv.hpp"
#include "dtaas/engine.hpp"
#include "dtaas/experiment.hpp"
#include "dtaas/metrics.hpp"
#include "dtaas/plot.hpp"
#include "dtaas/trace_io.hpp"
#include "dtaas/verify.hpp"

namespace fs = std::filesystem;

namespace dtaas::cli {

namespace {

struct ScenarioArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::vector<std::string> controllers;
    int jobs = 0;
};

void add_scenario_options(CLI::App* cmd, ScenarioArgs& a) {
    cmd->add_option("-c,--config", a.config_path, "Scenario file (INI); defaults apply when omitted");
    cmd->add_option("-s,--set", a.overrides, "Override one field, key=value (repeatable)");
    cmd->add_option("-o,--out", a.out_dir, std::string("Output directory (default $") + kOutputDirEnv + " or ./out)");
    cmd->add_option("--controllers", a.controllers, "Subset of DTAAS, RSO, CDRL (comma-separated)")->delimiter(',');
    cmd->add_option("-j,--jobs", a.jobs, "Worker threads, 0 = hardware concurrency")->check(CLI::NonNegativeNumber);
}

std::string output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return "out";
}

ScenarioConfig build_config(const ScenarioArgs& a) {
    ScenarioConfig c = a.config_path.empty() ? default_config() : load_config(a.config_path);
    for (const auto& o : a.overrides) apply_override(c, o);
    require_valid(c);
    return c;
}

experiment::Options experiment_options(const ScenarioArgs& a) {
    experiment::Options o;
    o.jobs = a.jobs;
    if (!a.controllers.empty()) {
        o.controllers.clear();
        for (const auto& name : a.controllers) {
            auto k = parse_controller(name);
            if (!k) throw ConfigError({{"controllers", name, "expected DTAAS, RSO or CDRL"}});
            o.controllers.push_back(*k);
        }
    }
    return o;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

int cmd_run(const ScenarioArgs& a, std::ostream& out) {
    const auto config = build_config(a);
    auto options = experiment_options(a);
    const fs::path dir = output_dir(a.out_dir);
    fs::create_directories(dir);
    write_text(dir / "config.ini", serialize(config));
    std::mutex io;
    options.on_run = [&](const engine::RunTrace& t) {
        std::lock_guard lock(io);
        trace_io::write_run(dir.string(), t);
    };
    const auto result = experiment::run_experiment(config, options);
    std::ostringstream report;
    metrics::write_report_csv(report, result.report);
    write_text(dir / "report.csv", report.str());

    for (auto c : options.controllers) {
        out << to_string(c) << ": compliance " << csv::format_real(result.report.mean(c, metrics::kCompliance))
            << " %, over-provisioning " << csv::format_real(result.report.mean(c, metrics::kOverProvisioning))
            << " %, latency " << csv::format_real(result.report.mean(c, metrics::kLatency)) << " ms\n";
    }
    out << "wrote " << (dir / "report.csv").string() << '\n';
    return kOk;
}

std::vector<double> parse_values(const std::string& spec) {
    std::vector<double> values;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (item.empty() || end != item.c_str() + item.size()) {
            throw ConfigError({{"values", item, "not a number"}});
        }
        values.push_back(v);
    }
    if (values.empty()) throw ConfigError({{"values", spec, "empty grid"}});
    return values;
}

std::string lower(std::string_view s) {
    std::string r(s);
    for (auto& ch : r) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return r;
}

int cmd_sweep(const ScenarioArgs& a, const std::string& variable, const std::string& values, std::ostream& out) {
    std::string upper = variable;
    for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    const auto p = experiment::parse_sweep_parameter(upper);
    if (!p) throw ConfigError({{"variable", variable, "expected LOAD, HORIZON or SLICES"}});
    const auto config = build_config(a);
    const auto grid = values.empty() ? experiment::default_grid(*p) : parse_values(values);
    for (double v : grid) require_valid(experiment::apply_sweep_value(config, *p, v));

    const fs::path dir = output_dir(a.out_dir);
    fs::create_directories(dir);
    write_text(dir / "config.ini", serialize(config));
    const auto points = experiment::run_sweep(config, *p, grid, experiment_options(a));
    std::ostringstream csv_text;
    experiment::write_sweep_csv(csv_text, points);
    const auto file = dir / ("sweep_" + lower(experiment::to_string(*p)) + ".csv");
    write_text(file, csv_text.str());
    out << "wrote " << file.string() << '\n';
    return kOk;
}

int cmd_plot(const std::string& csv_path, const std::string& out_flag, const std::string& x_label, std::ostream& out) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw ConfigError({{"file", csv_path, "cannot open sweep CSV"}});
    std::stringstream buf;
    buf << in.rdbuf();
    std::string label = x_label;
    if (label.empty()) {
        // sweep_load.csv -> LOAD
        auto stem = fs::path(csv_path).stem().string();
        if (stem.rfind("sweep_", 0) == 0) stem = stem.substr(6);
        label = stem;
        for (auto& ch : label) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    }
    std::map<std::string, plot::Chart> charts;
    try {
        charts = plot::charts_from_sweep(buf.str(), label);
    } catch (const std::runtime_error& e) {
        throw ConfigError({{"file", csv_path, e.what()}});
    }
    const fs::path dir = out_flag.empty() ? fs::path(csv_path).parent_path() : fs::path(out_flag);
    if (!dir.empty()) fs::create_directories(dir);
    const auto stem = fs::path(csv_path).stem().string();
    for (const auto& [metric, chart] : charts) {
        const auto file = dir / (stem + "_" + metric + ".svg");
        write_text(file, plot::render_svg(chart));
        out << "wrote " << file.string() << '\n';
    }
    return kOk;
}

int cmd_verify(const std::string& dir, std::ostream& out, std::ostream& err) {
    if (!fs::is_directory(dir)) throw ConfigError({{"dir", dir, "not a directory"}});
    std::vector<verify::Mismatch> mismatches;
    try {
        mismatches = verify::verify_directory(dir);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::runtime_error& e) {
        throw ConfigError({{"dir", dir, e.what()}});
    }
    if (mismatches.empty()) {
        out << "verified " << dir << ": all KPIs and logged objective values match\n";
        return kOk;
    }
    for (const auto& m : mismatches) err << m.message() << '\n';
    err << mismatches.size() << " mismatch(es)\n";
    return kVerifyMismatch;
}

int cmd_validate(const std::string& path, const std::vector<std::string>& overrides, std::ostream& out) {
    ScenarioArgs a;
    a.config_path = path;
    a.overrides = overrides;
    build_config(a);
    out << path << ": ok\n";
    return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Digital-twin slice orchestration simulator", "dtaas"};
    app.require_subcommand(1);

    ScenarioArgs run_args;
    auto* run = app.add_subcommand("run", "Run every controller for the configured repetitions");
    add_scenario_options(run, run_args);

    ScenarioArgs sweep_args;
    std::string variable, values;
    auto* sweep = app.add_subcommand("sweep", "Sweep LOAD, HORIZON or SLICES and write sweep_<variable>.csv");
    sweep->add_option("variable", variable, "LOAD, HORIZON or SLICES")->required();
    sweep->add_option("--values", values, "Comma-separated grid replacing the default");
    add_scenario_options(sweep, sweep_args);

    std::string plot_csv, plot_out, plot_label;
    auto* plt = app.add_subcommand("plot", "Render one SVG chart per metric of a sweep CSV");
    plt->add_option("csv", plot_csv, "sweep_<variable>.csv")->required();
    plt->add_option("-o,--out", plot_out, "Directory for the SVG files (default: next to the CSV)");
    plt->add_option("--x-label", plot_label, "x-axis label");

    std::string verify_dir;
    auto* ver = app.add_subcommand("verify", "Recompute KPIs and logged objectives of a run directory");
    ver->add_option("dir", verify_dir, "Output directory of `run`")->required();

    std::string validate_path;
    std::vector<std::string> validate_overrides;
    auto* val = app.add_subcommand("validate-config", "Check a scenario file");
    val->add_option("file", validate_path)->required();
    val->add_option("-s,--set", validate_overrides, "Override one field, key=value (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (*run) return cmd_run(run_args, out);
        if (*sweep) return cmd_sweep(sweep_args, variable, values, out);
        if (*plt) return cmd_plot(plot_csv, plot_out, plot_label, out);
        if (*ver) return cmd_verify(verify_dir, out, err);
        if (*val) return cmd_validate(validate_path, validate_overrides, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const engine::InvariantViolation& e) {
        err << "invariant violation: " << e.what() << '\n';
        return kInvariantViolation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}

}  // namespace dtaas::cli
