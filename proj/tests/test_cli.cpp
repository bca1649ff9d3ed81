#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "mcfqkd/csv.hpp"

#ifndef MCFQKD_CLI_PATH
#define MCFQKD_CLI_PATH "./mcfqkd"
#endif
#ifndef MCFQKD_DATA_DIR
#define MCFQKD_DATA_DIR "."
#endif

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string output;
};

CmdResult run_cli(const std::string& args) {
    const std::string cmd = std::string(MCFQKD_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CmdResult res;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) {
        res.output.append(buf, n);
    }
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("simulate prints the loss budget decomposition and provenance") {
    const CmdResult r = run_cli("simulate");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "total_loss_db,14.10"));
    CHECK(contains(r.output, "fiber_db,12.40"));
    CHECK(contains(r.output, "fanout_db,1.10"));
    CHECK(contains(r.output, "filter_db,0.60"));
    CHECK(contains(r.output, "config_hash="));
}

TEST_CASE("simulate --out writes the same report to a file") {
    const std::string out = temp_file("mcfqkd_cli_sim.csv");
    const CmdResult r = run_cli("simulate --out " + out);
    CHECK(r.exit_code == 0);
    const std::string file = mcfqkd::read_text_file(out);
    CHECK(contains(file, "total_loss_db,14.10"));
    CHECK(contains(file, "config_hash="));
}

TEST_CASE("plan prints the DWDM planning line") {
    const CmdResult r = run_cli("plan --cores 5 --channels 64 --power-mw 1 --gbps 10");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "320 mW/direction, 6.4 Tb/s"));
}

TEST_CASE("sweep with min above max is a usage error, exit 2") {
    const CmdResult r = run_cli("sweep --min-mw 100 --max-mw 2 --points 10");
    CHECK(r.exit_code == 2);
}

TEST_CASE("missing required option is a usage error, exit 2") {
    const CmdResult r = run_cli("plan --cores 5");
    CHECK(r.exit_code == 2);
}

TEST_CASE("config error classes map to distinct exit codes") {
    const std::string bad_syntax = temp_file("mcfqkd_cli_bad_syntax.json");
    write_file(bad_syntax, "{ not json");
    CHECK(run_cli("simulate --config " + bad_syntax).exit_code == 2);

    const std::string unknown = temp_file("mcfqkd_cli_unknown.json");
    write_file(unknown, R"({"detector": {"efficency": 0.2}})");
    const CmdResult r3 = run_cli("simulate --config " + unknown);
    CHECK(r3.exit_code == 3);
    CHECK(contains(r3.output, "detector.efficency"));

    const std::string invariant = temp_file("mcfqkd_cli_invariant.json");
    write_file(invariant, R"({"detector": {"efficiency": 1.5}})");
    const CmdResult r4 = run_cli("simulate --config " + invariant);
    CHECK(r4.exit_code == 4);
    CHECK(contains(r4.output, "detector.efficiency"));

    CHECK(run_cli("calibrate --target-sifted-bps 2e9").exit_code == 5);
}

TEST_CASE("calibrate writes a config that reproduces the baseline") {
    const std::string cal = temp_file("mcfqkd_cli_cal.json");
    const CmdResult r = run_cli("calibrate --out " + cal);
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "fitted_efficiency,"));
    CHECK(contains(r.output, "residual_secure_rel,"));

    const CmdResult sim = run_cli("simulate --config " + cal);
    CHECK(sim.exit_code == 0);
    CHECK(contains(sim.output, "total_loss_db,14.10"));

    // parse the secure rate back out of the key,value stream
    const auto pos = sim.output.find("secure_rate_finite_bps,");
    REQUIRE(pos != std::string::npos);
    const double secure = std::stod(sim.output.substr(pos + 23));
    CHECK(secure == doctest::Approx(627e3).epsilon(0.01));
}

TEST_CASE("session output is seeded, reproducible and re-parseable") {
    const std::string out_a = temp_file("mcfqkd_cli_sess_a.csv");
    const std::string out_b = temp_file("mcfqkd_cli_sess_b.csv");
    const std::string cal = temp_file("mcfqkd_cli_cal2.json");
    REQUIRE(run_cli("calibrate --out " + cal).exit_code == 0);

    const CmdResult a =
        run_cli("session --config " + cal + " --hours 0.5 --seed 42 --out " + out_a);
    CHECK(a.exit_code == 0);
    CHECK(contains(a.output, "# seed=42"));
    const CmdResult b =
        run_cli("session --config " + cal + " --hours 0.5 --seed 42 --out " + out_b);
    CHECK(b.exit_code == 0);
    CHECK(mcfqkd::read_text_file(out_a) == mcfqkd::read_text_file(out_b));

    const mcfqkd::ResultsTable table = mcfqkd::read_csv(out_a);
    CHECK(table.columns ==
          std::vector<std::string>{"timestamp_s", "qber", "secure_finite_bps"});
    CHECK(table.rows.size() > 10);
    bool has_seed_comment = false;
    for (const auto& c : table.comments) {
        if (contains(c, "seed=42")) has_seed_comment = true;
    }
    CHECK(has_seed_comment);
}

TEST_CASE("sweep csv has the documented column schema") {
    const std::string out = temp_file("mcfqkd_cli_sweep.csv");
    const CmdResult r =
        run_cli("sweep --min-mw 2 --max-mw 200 --points 5 --log --out " + out);
    CHECK(r.exit_code == 0);
    const mcfqkd::ResultsTable table = mcfqkd::read_csv(out);
    CHECK(table.columns ==
          std::vector<std::string>{"combined_mw", "qber", "sifted_bps", "secure_asym_bps",
                                   "secure_finite_bps", "raman_w", "leakage_w"});
    REQUIRE(table.rows.size() == 5);
    CHECK(table.rows.front()[0] == doctest::Approx(2.0));
    CHECK(table.rows.back()[0] == doctest::Approx(200.0));
}

TEST_CASE("fit-raman reports an interval containing the default") {
    const std::string cal = temp_file("mcfqkd_cli_cal3.json");
    REQUIRE(run_cli("calibrate --out " + cal).exit_code == 0);
    const CmdResult r = run_cli("fit-raman --config " + cal);
    CHECK(r.exit_code == 0);
    const auto lo_pos = r.output.find("kappa_lo_w_per_nm_mw,");
    const auto hi_pos = r.output.find("kappa_hi_w_per_nm_mw,");
    REQUIRE(lo_pos != std::string::npos);
    REQUIRE(hi_pos != std::string::npos);
    const double lo = std::stod(r.output.substr(lo_pos + 21));
    const double hi = std::stod(r.output.substr(hi_pos + 21));
    CHECK(lo <= 5e-16);
    CHECK(hi >= 5e-16);
}
