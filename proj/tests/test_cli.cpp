#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dtaas/cli.hpp"
#include "dtaas/csv.hpp"

using namespace dtaas;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "dtaas");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh(const std::string& name) {
    const auto d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    return d;
}

const std::vector<std::string> kSmall{"--set", "horizon_slots=150", "--set", "repetitions=2",
                                      "--set", "hidden_size=8"};

std::vector<std::string> with_small(std::vector<std::string> v) {
    v.insert(v.end(), kSmall.begin(), kSmall.end());
    return v;
}

}  // namespace

TEST_CASE("help exits cleanly") {
    const auto r = invoke({"--help"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("run") != std::string::npos);
    CHECK(invoke({"run", "--help"}).code == cli::kOk);
}

TEST_CASE("usage errors") {
    CHECK(invoke({}).code == cli::kConfigError);
    CHECK(invoke({"frobnicate"}).code == cli::kConfigError);
    CHECK(invoke({"sweep", "BANDWIDTH"}).code == cli::kConfigError);
}

TEST_CASE("config errors name the culprit") {
    const auto missing = invoke({"run", "-c", "/nonexistent/scenario.ini"});
    CHECK(missing.code == cli::kConfigError);
    CHECK(missing.err.find("/nonexistent/scenario.ini") != std::string::npos);

    const auto bad = invoke({"run", "--set", "alpha=-1", "-o", fresh("dtaas_cli_bad").string()});
    CHECK(bad.code == cli::kConfigError);
    CHECK(bad.err.find("alpha") != std::string::npos);
    CHECK_FALSE(fs::exists(fresh("dtaas_cli_bad") / "report.csv"));

    const auto controllers = invoke({"run", "--controllers", "DTAAS,FOO"});
    CHECK(controllers.code == cli::kConfigError);
    CHECK(controllers.err.find("FOO") != std::string::npos);
}

TEST_CASE("validate-config") {
    const auto shipped = std::string(DTAAS_SOURCE_DIR) + "/configs/default.ini";
    const auto ok = invoke({"validate-config", shipped});
    CHECK(ok.code == cli::kOk);
    const auto bad = invoke({"validate-config", shipped, "--set", "slice.urllc.satisfaction_threshold=2"});
    CHECK(bad.code == cli::kConfigError);
    CHECK(bad.err.find("slice.urllc.satisfaction_threshold") != std::string::npos);
}

TEST_CASE("run writes a reproducible, verifiable directory") {
    const auto a = fresh("dtaas_cli_run_a");
    const auto b = fresh("dtaas_cli_run_b");
    const auto ra = invoke(with_small({"run", "-o", a.string(), "-j", "2"}));
    REQUIRE(ra.code == cli::kOk);
    CHECK(ra.out.find("DTAAS: compliance") != std::string::npos);
    REQUIRE(invoke(with_small({"run", "-o", b.string(), "-j", "1"})).code == cli::kOk);

    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    const std::vector<std::string> expected{
        "config.ini",
        "decisions_cdrl_20250101.csv", "decisions_cdrl_20250102.csv",
        "decisions_dtaas_20250101.csv", "decisions_dtaas_20250102.csv",
        "decisions_rso_20250101.csv", "decisions_rso_20250102.csv",
        "report.csv",
        "trace_cdrl_20250101.csv", "trace_cdrl_20250102.csv",
        "trace_dtaas_20250101.csv", "trace_dtaas_20250102.csv",
        "trace_rso_20250101.csv", "trace_rso_20250102.csv",
        "twins_dtaas_20250101.csv", "twins_dtaas_20250102.csv"};
    CHECK(names == expected);
    for (const auto& n : names) {
        INFO(n);
        CHECK(slurp(a / n) == slurp(b / n));
    }

    std::ifstream rep(a / "report.csv");
    const auto table = csv::Table::read(rep);
    std::size_t scoped = 0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table.text(i, "slice_id") != "all" && table.text(i, "metric") == "sla_compliance_pct") ++scoped;
    }
    CHECK(scoped == 3 * 3);

    const auto v = invoke({"verify", a.string()});
    CHECK(v.code == cli::kOk);

    std::string text = slurp(a / "report.csv");
    const auto pos = text.find("RSO,all,sla_compliance_pct,");
    REQUIRE(pos != std::string::npos);
    text.replace(pos + 27, 1, text[pos + 27] == '1' ? "2" : "1");
    std::ofstream(a / "report.csv", std::ios::binary) << text;
    const auto bad = invoke({"verify", a.string()});
    CHECK(bad.code == cli::kVerifyMismatch);
    CHECK(bad.err.find("RSO,all,sla_compliance_pct") != std::string::npos);

    CHECK(invoke({"verify", (a / "nope").string()}).code == cli::kConfigError);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("output directory from the environment") {
    const auto d = fresh("dtaas_cli_env");
    ::setenv(cli::kOutputDirEnv, d.string().c_str(), 1);
    const auto r = invoke(with_small({"run", "--controllers", "RSO", "--set", "repetitions=1"}));
    ::unsetenv(cli::kOutputDirEnv);
    CHECK(r.code == cli::kOk);
    CHECK(fs::exists(d / "report.csv"));
    CHECK(fs::exists(d / "trace_rso_20250101.csv"));
    fs::remove_all(d);
}

TEST_CASE("sweep then plot") {
    const auto d = fresh("dtaas_cli_sweep");
    const auto r = invoke(with_small({"sweep", "load", "--values", "0.5,1.0", "-o", d.string(), "--controllers",
                                   "RSO,CDRL"}));
    REQUIRE(r.code == cli::kOk);
    const auto csv_path = d / "sweep_load.csv";
    REQUIRE(fs::exists(csv_path));
    std::ifstream in(csv_path);
    const auto table = csv::Table::read(in);
    CHECK(table.size() == 2 * 2 * 3);

    CHECK(invoke(with_small({"sweep", "load", "--values", "0.5,abc", "-o", d.string()})).code == cli::kConfigError);

    const auto p = invoke({"plot", csv_path.string()});
    CHECK(p.code == cli::kOk);
    CHECK(fs::exists(d / "sweep_load_sla_compliance_pct.svg"));
    CHECK(fs::exists(d / "sweep_load_over_provisioning_pct.svg"));
    CHECK(fs::exists(d / "sweep_load_avg_latency_ms.svg"));
    CHECK(slurp(d / "sweep_load_avg_latency_ms.svg").find("LOAD") != std::string::npos);
    CHECK(invoke({"plot", (d / "missing.csv").string()}).code == cli::kConfigError);
    fs::remove_all(d);
}
