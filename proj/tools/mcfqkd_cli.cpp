// Command-line front end: single-point simulation, power sweeps, baseline
// calibration, Raman-coefficient fitting, long-run session emulation and
// DWDM bandwidth planning. All I/O is CSV/stdout; exit codes are
// 0 ok, 2 parse, 3 unknown key, 4 invariant, 5 infeasible.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mcfqkd/config.hpp"
#include "mcfqkd/csv.hpp"
#include "mcfqkd/engine.hpp"
#include "mcfqkd/errors.hpp"

namespace {

using namespace mcfqkd;

Scenario scenario_from(const std::string& config_path) {
    if (config_path.empty()) {
        return reference_scenario();
    }
    return load_config(config_path);
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

void print_provenance(std::ostream& out, const char* command, const Scenario& s,
                      std::optional<std::uint64_t> seed = std::nullopt) {
    out << "# mcfqkd " << command << "\n";
    out << "# config_hash=" << config_hash_hex(s) << "\n";
    if (seed) {
        out << "# seed=" << *seed << "\n";
    }
}

void print_sim_result(std::ostream& out, const SimResult& r) {
    // Loss budget lines use two decimals to read like a link budget sheet;
    // everything else is full precision.
    out << "fiber_db," << fixed2(r.loss.fiber_db) << "\n";
    out << "fanout_db," << fixed2(r.loss.fanout_db) << "\n";
    out << "filter_db," << fixed2(r.loss.filter_db) << "\n";
    out << "lumped_db," << fixed2(r.loss.lumped_db) << "\n";
    out << "total_loss_db," << fixed2(r.loss.total_db) << "\n";
    out << "leakage_in_band_w," << format_double(r.noise.leakage_in_band_w.watts) << "\n";
    out << "raman_in_band_w," << format_double(r.noise.raman_in_band_w.watts) << "\n";
    out << "noise_count_prob_per_gate," << format_double(r.noise.noise_count_prob_per_gate)
        << "\n";
    out << "dark_count_prob_per_gate," << format_double(r.noise.dark_count_prob_per_gate)
        << "\n";
    for (const auto& src : r.noise.breakdown) {
        out << "noise_source," << src.label << "," << format_double(src.power_at_detector.watts)
            << "," << format_double(src.prob_per_gate) << "\n";
    }
    out << "eta_total," << format_double(r.gains.eta_total) << "\n";
    out << "background_y0," << format_double(r.gains.background_y0) << "\n";
    out << "q_mu," << format_double(r.gains.q_mu) << "\n";
    out << "e_mu," << format_double(r.gains.e_mu) << "\n";
    out << "q_nu," << format_double(r.gains.q_nu) << "\n";
    out << "e_nu," << format_double(r.gains.e_nu) << "\n";
    out << "q_vacuum," << format_double(r.gains.q_vacuum) << "\n";
    out << "y1_lower," << format_double(r.rate.estimate.y1_lower) << "\n";
    out << "e1_upper," << format_double(r.rate.estimate.e1_upper) << "\n";
    out << "q1_lower," << format_double(r.rate.estimate.q1_lower) << "\n";
    out << "sifted_rate_bps," << format_double(r.rate.sifted_rate_bps) << "\n";
    out << "qber," << format_double(r.rate.qber) << "\n";
    out << "secure_rate_asymptotic_bps," << format_double(r.rate.secure_rate_asymptotic_bps)
        << "\n";
    out << "secure_rate_finite_bps," << format_double(r.rate.secure_rate_finite_bps) << "\n";
    out << "saturated," << (r.rate.saturated ? 1 : 0) << "\n";
    if (!r.rate.diagnostic.empty()) {
        out << "# diagnostic: " << r.rate.diagnostic << "\n";
    }
}

int run_simulate(const std::string& config_path, const std::string& out_path) {
    const Scenario s = scenario_from(config_path);
    const SimResult r = simulate_point(s);
    print_provenance(std::cout, "simulate", s);
    print_sim_result(std::cout, r);
    if (!out_path.empty()) {
        std::ostringstream file;
        print_provenance(file, "simulate", s);
        print_sim_result(file, r);
        write_text_file(out_path, file.str());
    }
    return 0;
}

int run_sweep(const std::string& config_path, double min_mw, double max_mw, int points,
              bool log_scale, const std::string& out_path) {
    const Scenario s = scenario_from(config_path);
    SweepSpec sweep;
    sweep.power_min_mw = min_mw;
    sweep.power_max_mw = max_mw;
    sweep.points = points;
    sweep.scale = log_scale ? SweepSpec::Scale::log : SweepSpec::Scale::linear;
    try {
        sweep.validate();
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::parse_error);
    }

    const auto results = sweep_power(s, sweep);

    ResultsTable table;
    table.comments = {"mcfqkd sweep", "config_hash=" + config_hash_hex(s),
                      "columns: powers in mW, rates in b/s, optical powers in W"};
    table.columns = {"combined_mw", "qber",    "sifted_bps", "secure_asym_bps",
                     "secure_finite_bps", "raman_w", "leakage_w"};
    for (const auto& p : results) {
        table.rows.push_back({p.combined_power_mw, p.result.rate.qber,
                              p.result.rate.sifted_rate_bps,
                              p.result.rate.secure_rate_asymptotic_bps,
                              p.result.rate.secure_rate_finite_bps,
                              p.result.noise.raman_in_band_w.watts,
                              p.result.noise.leakage_in_band_w.watts});
    }
    if (!out_path.empty()) {
        write_csv(out_path, table);
        std::cout << "# mcfqkd sweep\n# config_hash=" << config_hash_hex(s) << "\n";
        std::cout << "# wrote " << table.rows.size() << " points to " << out_path << "\n";
    } else {
        std::cout << to_csv(table);
    }
    return 0;
}

int run_calibrate(const std::string& config_path, const std::string& out_path,
                  const CalibrationTargets& targets) {
    const Scenario s = scenario_from(config_path);
    const CalibrationResult result = calibrate_baseline(s, targets);
    print_provenance(std::cout, "calibrate", s);
    const auto& rep = result.report;
    std::cout << "fitted_efficiency," << format_double(rep.fitted_efficiency) << "\n";
    std::cout << "fitted_e_opt," << format_double(rep.fitted_e_opt) << "\n";
    std::cout << "fitted_f_ec," << format_double(rep.fitted_f_ec) << "\n";
    std::cout << "residual_sifted_rel," << format_double(rep.residual_sifted_rel) << "\n";
    std::cout << "residual_qber_abs," << format_double(rep.residual_qber_abs) << "\n";
    std::cout << "residual_secure_rel," << format_double(rep.residual_secure_rel) << "\n";
    std::cout << "efficiency_iterations," << rep.efficiency_iterations << "\n";
    std::cout << "f_ec_iterations," << rep.f_ec_iterations << "\n";
    std::cout << "# " << rep.notes << "\n";
    if (!out_path.empty()) {
        write_config(out_path, result.scenario);
        std::cout << "# calibrated_config_hash=" << config_hash_hex(result.scenario) << "\n";
        std::cout << "# wrote " << out_path << "\n";
    }
    return 0;
}

int run_session(const std::string& config_path, double hours, std::uint64_t seed,
                double qber_mean, double qber_std, const std::string& out_path) {
    const Scenario s = scenario_from(config_path);
    SessionSpec spec;
    spec.duration_hours = hours;
    spec.qber_mean = qber_mean;
    spec.qber_std = qber_std;
    spec.rng_seed = seed;
    const SessionResult session = emulate_session(s, spec);

    ResultsTable table;
    table.comments = {"mcfqkd session", "config_hash=" + config_hash_hex(s),
                      "seed=" + std::to_string(seed),
                      "blocks=" + std::to_string(session.summary.blocks),
                      "block_duration_s=" + format_double(session.summary.block_duration_s),
                      "qber_mean=" + format_double(session.summary.qber_mean),
                      "qber_std=" + format_double(session.summary.qber_std),
                      "secure_mean_bps=" + format_double(session.summary.secure_mean_bps),
                      "secure_std_bps=" + format_double(session.summary.secure_std_bps)};
    for (std::size_t b = 0; b + 1 < session.summary.qber_hist_edges.size(); ++b) {
        table.comments.push_back(
            "qber_hist," + format_double(session.summary.qber_hist_edges[b]) + "," +
            format_double(session.summary.qber_hist_edges[b + 1]) + "," +
            std::to_string(session.summary.qber_hist_counts[b]));
    }
    table.columns = {"timestamp_s", "qber", "secure_finite_bps"};
    for (const auto& blk : session.blocks) {
        table.rows.push_back({blk.timestamp_s, blk.qber, blk.secure_finite_bps});
    }

    print_provenance(std::cout, "session", s, seed);
    std::cout << "blocks," << session.summary.blocks << "\n";
    std::cout << "block_duration_s," << format_double(session.summary.block_duration_s) << "\n";
    std::cout << "qber_mean," << format_double(session.summary.qber_mean) << "\n";
    std::cout << "qber_std," << format_double(session.summary.qber_std) << "\n";
    std::cout << "secure_mean_bps," << format_double(session.summary.secure_mean_bps) << "\n";
    std::cout << "secure_std_bps," << format_double(session.summary.secure_std_bps) << "\n";
    if (!out_path.empty()) {
        write_csv(out_path, table);
        std::cout << "# wrote " << table.rows.size() << " blocks to " << out_path << "\n";
    }
    return 0;
}

int run_fit_raman(const std::string& config_path) {
    const Scenario s = scenario_from(config_path);
    const RamanFitResult fit = fit_raman_coefficient(s);
    print_provenance(std::cout, "fit-raman", s);
    std::cout << "kappa_lo_w_per_nm_mw," << format_double(fit.kappa_lo) << "\n";
    std::cout << "kappa_hi_w_per_nm_mw," << format_double(fit.kappa_hi) << "\n";
    std::cout << "recommended_w_per_nm_mw," << format_double(fit.recommended) << "\n";
    std::cout << "configured_w_per_nm_mw,"
              << format_double(s.raman_coefficient_w_per_nm_mw) << "\n";
    std::cout << "drop_at_100mw_configured," << format_double(fit.drop_at_100mw_default)
              << "\n";
    std::cout << "secure_at_2000mw_configured_bps,"
              << format_double(fit.secure_at_2000mw_default) << "\n";
    std::cout << "# admissible interval: kappa_lo keeps the rate drop at 100 mW combined "
                 "below 1%, kappa_hi keeps the key positive at 2000 mW combined\n";
    return 0;
}

int run_plan(int cores, int channels, double power_mw, double gbps) {
    const BandwidthPlan plan = plan_bandwidth(cores, channels, power_mw, gbps);
    char line[160];
    std::snprintf(line, sizeof(line), "%.6g mW/direction, %.6g Tb/s",
                  plan.power_per_direction_mw, plan.aggregate_bidirectional_tbps);
    std::cout << "# mcfqkd plan\n";
    std::cout << cores << " cores x " << channels << " ch/direction x " << power_mw
              << " mW @ " << gbps << " Gb/s -> " << line << " bidirectional\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum/classical coexistence simulator for multicore-fiber QKD links"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    double min_mw = 2.0, max_mw = 3000.0, hours = 24.0;
    double qber_mean = 0.0336, qber_std = 0.0054;
    int points = 50, cores = 5, channels = 64;
    double power_mw = 1.0, gbps = 10.0;
    bool log_scale = false;
    std::uint64_t seed = 1;
    CalibrationTargets targets;
    double target_secure = targets.secure_finite_bps.value_or(627e3);
    bool no_secure_target = false;

    auto* simulate = app.add_subcommand("simulate", "Evaluate a single operating point");
    simulate->add_option("--config", config_path, "Scenario config (JSON); defaults otherwise");
    simulate->add_option("--out", out_path, "Also write the report to this file");

    auto* sweep = app.add_subcommand("sweep", "Sweep total data launch power");
    sweep->add_option("--config", config_path, "Scenario config (JSON); defaults otherwise");
    sweep->add_option("--min-mw", min_mw, "Lowest combined power (mW)")->required();
    sweep->add_option("--max-mw", max_mw, "Highest combined power (mW)")->required();
    sweep->add_option("--points", points, "Grid points")->required();
    sweep->add_flag("--log", log_scale, "Logarithmic grid");
    sweep->add_option("--out", out_path, "Results CSV path");

    auto* calibrate =
        app.add_subcommand("calibrate", "Fit detector efficiency, e_opt and f_ec to targets");
    calibrate->add_option("--config", config_path, "Scenario config (JSON); defaults otherwise");
    calibrate->add_option("--out", out_path, "Write the calibrated config here");
    calibrate->add_option("--target-sifted-bps", targets.sifted_rate_bps, "Sifted-rate target");
    calibrate->add_option("--target-qber", targets.qber, "QBER target");
    calibrate->add_option("--target-secure-bps", target_secure, "Finite secure-rate target");
    calibrate->add_flag("--no-secure-target", no_secure_target, "Skip the f_ec stage");

    auto* session = app.add_subcommand("session", "Emulate a long QKD run block by block");
    session->add_option("--config", config_path, "Scenario config (JSON); defaults otherwise");
    session->add_option("--hours", hours, "Session duration in hours");
    session->add_option("--seed", seed, "RNG seed (same seed, same series)");
    session->add_option("--qber-mean", qber_mean, "Per-block QBER mean");
    session->add_option("--qber-std", qber_std, "Per-block QBER standard deviation");
    session->add_option("--out", out_path, "Time-series CSV path");

    auto* fit_raman =
        app.add_subcommand("fit-raman", "Admissible worst-case Raman coefficient interval");
    fit_raman->add_option("--config", config_path, "Scenario config (JSON); defaults otherwise");

    auto* plan = app.add_subcommand("plan", "DWDM power/bandwidth planning arithmetic");
    plan->add_option("--cores", cores, "Data cores")->required();
    plan->add_option("--channels", channels, "Channels per core per direction")->required();
    plan->add_option("--power-mw", power_mw, "Power per channel (mW)")->required();
    plan->add_option("--gbps", gbps, "Rate per channel (Gb/s)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        app.exit(e);
        return static_cast<int>(mcfqkd::ExitCode::parse_error);
    }

    try {
        if (simulate->parsed()) return run_simulate(config_path, out_path);
        if (sweep->parsed()) return run_sweep(config_path, min_mw, max_mw, points, log_scale,
                                              out_path);
        if (calibrate->parsed()) {
            targets.secure_finite_bps =
                no_secure_target ? std::nullopt : std::optional<double>(target_secure);
            return run_calibrate(config_path, out_path, targets);
        }
        if (session->parsed())
            return run_session(config_path, hours, seed, qber_mean, qber_std, out_path);
        if (fit_raman->parsed()) return run_fit_raman(config_path);
        if (plan->parsed()) return run_plan(cores, channels, power_mw, gbps);
    } catch (const mcfqkd::UnknownKeyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(mcfqkd::ExitCode::unknown_key);
    } catch (const mcfqkd::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(mcfqkd::ExitCode::parse_error);
    } catch (const mcfqkd::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(mcfqkd::ExitCode::infeasible);
    } catch (const mcfqkd::InvariantError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(mcfqkd::ExitCode::invariant_violation);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(mcfqkd::ExitCode::invariant_violation);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
