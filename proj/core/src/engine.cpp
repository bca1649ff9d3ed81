#include "mcfqkd/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "mcfqkd/errors.hpp"

namespace mcfqkd {

void Scenario::validate() const {
    fiber.validate();
    plan.validate(fiber);
    filter.validate();
    detector.validate();
    protocol.validate();
    if (raman_coefficient_w_per_nm_mw < 0.0) {
        throw InvariantError("raman.coefficient_w_per_nm_mw: must be >= 0");
    }
    if (detector.clock_hz != protocol.clock_hz) {
        throw InvariantError("detector.clock_hz and protocol.clock_hz must agree");
    }
}

Scenario reference_scenario() {
    Scenario s;

    s.fiber.length_km = 53.0;
    s.fiber.core_count = 7;
    s.fiber.attenuation_db_per_km.assign(7, 0.23);
    // 53 km * 0.23 dB/km = 12.19 dB; the remaining 0.21 dB of the measured
    // 12.4 dB fiber budget is splice/connector excess.
    s.fiber.excess_loss_db.assign(7, 0.21);
    s.fiber.fanout_in_db.assign(7, 0.55);
    s.fiber.fanout_out_db.assign(7, 0.55);
    s.fiber.leakage_forward_db.assign(7, -60.0);
    s.fiber.leakage_backward_db.assign(7, -80.0);
    s.fiber.lumped_attenuation_db = 0.0;

    s.plan.quantum = {{0}, {1547.72}};
    s.plan.data = {
        {{1}, {1552.72}, Propagation::co, OpticalPower::from_mw(1.0)},
        {{4}, {1552.72}, Propagation::counter, OpticalPower::from_mw(1.0)},
    };

    s.filter.center = {1547.72};
    s.filter.passband_nm = 0.4;
    s.filter.insertion_loss_db = 0.6;
    s.filter.out_of_band_isolation_db = 80.0;

    s.detector = DetectorSpec{};
    s.protocol = ProtocolParams{};
    s.raman_coefficient_w_per_nm_mw = default_raman_coefficient;
    s.mode = LinkMode::mcf;
    return s;
}

Scenario control_scenario_from(const Scenario& mcf) {
    const double mcf_total =
        quantum_loss_budget(mcf.fiber, mcf.plan, mcf.filter.insertion_loss_db).total_db;

    Scenario s = mcf;
    s.mode = LinkMode::dual_ssmf_control;
    s.fiber.length_km = 50.0;
    s.fiber.attenuation_db_per_km.assign(s.fiber.core_count, 0.20);
    s.fiber.excess_loss_db.assign(s.fiber.core_count, 0.0);
    s.fiber.fanout_in_db.assign(s.fiber.core_count, 0.0);
    s.fiber.fanout_out_db.assign(s.fiber.core_count, 0.0);

    const double ssmf_partial =
        quantum_loss_budget(s.fiber, s.plan, s.filter.insertion_loss_db).total_db;
    const double attenuator = mcf_total - ssmf_partial;
    if (attenuator < 0.0) {
        throw InvariantError("control scenario: SSMF path already lossier than the MCF");
    }
    s.fiber.lumped_attenuation_db = attenuator;
    return s;
}

SimResult simulate_point(const Scenario& scenario) {
    scenario.validate();

    SimResult out;
    out.loss = quantum_loss_budget(scenario.fiber, scenario.plan,
                                   scenario.filter.insertion_loss_db);

    // Physical separation in the control experiment: classical signals run
    // in a different fiber, so leakage and Raman crosstalk vanish.
    ChannelPlan noise_plan = scenario.plan;
    double kappa = scenario.raman_coefficient_w_per_nm_mw;
    if (scenario.mode == LinkMode::dual_ssmf_control) {
        noise_plan.data.clear();
        noise_plan.auxiliary.clear();
        kappa = 0.0;
    }
    out.noise = assemble_noise_budget(scenario.fiber, noise_plan, scenario.filter,
                                      scenario.detector, kappa);

    LinkOperatingPoint link;
    link.channel_transmittance = db_to_linear({-out.loss.total_db});
    link.detector = scenario.detector;
    link.noise = out.noise;

    out.gains = gain_and_error(scenario.protocol, link);
    const DecoyEstimate estimate = decoy_bounds(scenario.protocol, out.gains);
    const double sifted = sifted_rate_bps(scenario.protocol, out.gains);
    out.rate = secure_key_rate(scenario.protocol, out.gains, estimate, sifted);
    return out;
}

void SweepSpec::validate() const {
    if (!(power_min_mw > 0.0 && power_max_mw > power_min_mw)) {
        throw std::invalid_argument("sweep: requires 0 < min < max");
    }
    if (points < 2) {
        throw std::invalid_argument("sweep: requires at least 2 points");
    }
}

namespace {

Scenario with_combined_data_power(const Scenario& base, double combined_mw) {
    if (base.plan.data.empty()) {
        throw std::invalid_argument("sweep: scenario has no data channels to scale");
    }
    Scenario s = base;
    const double per_channel = combined_mw / static_cast<double>(s.plan.data.size());
    for (auto& ch : s.plan.data) {
        ch.launch = OpticalPower::from_mw(per_channel);
    }
    return s;
}

double secure_finite_at(const Scenario& base, double kappa, double combined_mw) {
    Scenario s = with_combined_data_power(base, combined_mw);
    s.raman_coefficient_w_per_nm_mw = kappa;
    return simulate_point(s).rate.secure_rate_finite_bps;
}

}  // namespace

std::vector<SweepPoint> sweep_power(const Scenario& scenario, const SweepSpec& sweep) {
    sweep.validate();
    scenario.validate();

    std::vector<double> grid(static_cast<std::size_t>(sweep.points));
    for (int i = 0; i < sweep.points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(sweep.points - 1);
        grid[static_cast<std::size_t>(i)] =
            sweep.scale == SweepSpec::Scale::log
                ? std::pow(10.0, std::log10(sweep.power_min_mw) +
                                     t * (std::log10(sweep.power_max_mw) -
                                          std::log10(sweep.power_min_mw)))
                : sweep.power_min_mw + t * (sweep.power_max_mw - sweep.power_min_mw);
    }

    std::vector<SweepPoint> out(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        out[i].combined_power_mw = grid[i];
        out[i].result = simulate_point(with_combined_data_power(scenario, grid[i]));
    });
    return out;
}

namespace {

Scenario zero_data_power(const Scenario& s) {
    Scenario z = s;
    for (auto& ch : z.plan.data) ch.launch = {0.0};
    for (auto& ch : z.plan.auxiliary) ch.launch = {0.0};
    return z;
}

}  // namespace

CalibrationResult calibrate_baseline(const Scenario& scenario,
                                     const CalibrationTargets& targets) {
    scenario.validate();
    if (!(targets.sifted_rate_bps > 0.0) || !(targets.qber > 0.0) ||
        (targets.secure_finite_bps && !(*targets.secure_finite_bps > 0.0))) {
        throw std::invalid_argument("calibrate: targets must be positive");
    }

    const Scenario quiet = zero_data_power(scenario);
    CalibrationResult result;
    result.scenario = scenario;

    // Stage 1: detector efficiency from the sifted-rate target. The sifted
    // rate is monotone in efficiency and independent of e_opt and f_ec.
    auto sifted_at = [&](double efficiency) {
        Scenario s = quiet;
        s.detector.efficiency = efficiency;
        return simulate_point(s).rate.sifted_rate_bps;
    };
    constexpr double eff_lo_bound = 1e-9;
    constexpr double eff_hi_bound = 1.0;
    const double sifted_lo = sifted_at(eff_lo_bound);
    const double sifted_hi = sifted_at(eff_hi_bound);
    if (targets.sifted_rate_bps < sifted_lo || targets.sifted_rate_bps > sifted_hi) {
        throw InfeasibleError("sifted_rate_bps", sifted_lo, sifted_hi,
                              "detector efficiency bracket (0, 1] cannot reach the target");
    }
    double lo = eff_lo_bound, hi = eff_hi_bound;
    double efficiency = 0.5 * (lo + hi);
    int eff_iters = 0;
    for (; eff_iters < 200; ++eff_iters) {
        efficiency = 0.5 * (lo + hi);
        const double sifted = sifted_at(efficiency);
        if (std::abs(sifted - targets.sifted_rate_bps) <= 1e-6 * targets.sifted_rate_bps) {
            break;
        }
        (sifted < targets.sifted_rate_bps ? lo : hi) = efficiency;
    }
    result.scenario.detector.efficiency = efficiency;

    // Stage 2: e_opt in closed form from E_mu*Q_mu = Y0/2 + e_opt*(1 - e^-eta*mu).
    Scenario fitted = zero_data_power(result.scenario);
    const SimResult probe = simulate_point(fitted);
    const double y0 = probe.gains.background_y0;
    const double smooth = probe.gains.q_mu - y0;  // 1 - exp(-eta*mu)
    const double qber_min = 0.5 * y0 / probe.gains.q_mu;
    const double qber_max = (0.5 * y0 + 0.1 * smooth) / probe.gains.q_mu;
    if (targets.qber < qber_min || targets.qber > qber_max) {
        throw InfeasibleError("qber", qber_min, qber_max,
                              "e_opt in [0, 0.1] cannot reach the QBER target");
    }
    const double e_opt = (targets.qber * probe.gains.q_mu - 0.5 * y0) / smooth;
    result.scenario.protocol.e_opt = e_opt;

    // Stage 3: f_ec against the secure-rate target, if present. The finite
    // rate is monotone decreasing in f_ec.
    int fec_iters = 0;
    if (targets.secure_finite_bps) {
        auto secure_at = [&](double f_ec) {
            Scenario s = zero_data_power(result.scenario);
            s.protocol.f_ec = f_ec;
            return simulate_point(s).rate.secure_rate_finite_bps;
        };
        constexpr double fec_lo_bound = 1.05;
        constexpr double fec_hi_bound = 1.25;
        const double secure_hi = secure_at(fec_lo_bound);
        const double secure_lo = secure_at(fec_hi_bound);
        const double target = *targets.secure_finite_bps;
        if (target < secure_lo || target > secure_hi) {
            throw InfeasibleError("secure_finite_bps", secure_lo, secure_hi,
                                  "f_ec in [1.05, 1.25] cannot reach the target");
        }
        double flo = fec_lo_bound, fhi = fec_hi_bound;
        double f_ec = 0.5 * (flo + fhi);
        for (; fec_iters < 200; ++fec_iters) {
            f_ec = 0.5 * (flo + fhi);
            const double secure = secure_at(f_ec);
            if (std::abs(secure - target) <= 1e-6 * target) {
                break;
            }
            (secure > target ? flo : fhi) = f_ec;
        }
        result.scenario.protocol.f_ec = f_ec;
    }

    const SimResult check = simulate_point(zero_data_power(result.scenario));
    result.report.fitted_efficiency = result.scenario.detector.efficiency;
    result.report.fitted_e_opt = result.scenario.protocol.e_opt;
    result.report.fitted_f_ec = result.scenario.protocol.f_ec;
    result.report.efficiency_iterations = eff_iters;
    result.report.f_ec_iterations = fec_iters;
    result.report.residual_sifted_rel =
        std::abs(check.rate.sifted_rate_bps - targets.sifted_rate_bps) /
        targets.sifted_rate_bps;
    result.report.residual_qber_abs = std::abs(check.rate.qber - targets.qber);
    result.report.residual_secure_rel =
        targets.secure_finite_bps
            ? std::abs(check.rate.secure_rate_finite_bps - *targets.secure_finite_bps) /
                  *targets.secure_finite_bps
            : 0.0;
    result.report.notes =
        "stage order efficiency -> e_opt -> f_ec: the sifted rate depends only on "
        "efficiency, and the QBER decomposition is independent of f_ec, so the three "
        "stages separate; fit performed at zero data power";
    return result;
}

RamanFitResult fit_raman_coefficient(const Scenario& scenario) {
    scenario.validate();

    constexpr double log_lo = -19.0;  // kappa bracket, W/nm/mW
    constexpr double log_hi = -12.0;
    constexpr double drop_limit = 0.01;
    constexpr double probe_low_mw = 2.0;
    constexpr double probe_mid_mw = 100.0;
    constexpr double probe_high_mw = 2000.0;

    auto drop_at = [&](double kappa) {
        const double base = secure_finite_at(scenario, kappa, probe_low_mw);
        if (!(base > 0.0)) return 1.0;
        return 1.0 - secure_finite_at(scenario, kappa, probe_mid_mw) / base;
    };
    auto positive_at_high = [&](double kappa) {
        return secure_finite_at(scenario, kappa, probe_high_mw) > 0.0;
    };

    if (drop_at(std::pow(10.0, log_lo)) >= drop_limit || !positive_at_high(std::pow(10.0, log_lo))) {
        throw InfeasibleError("raman_coefficient", 0.0, 0.0,
                              "calibrated baseline violates the power-sweep constraints even "
                              "with negligible Raman crosstalk");
    }

    auto bisect_largest = [&](auto&& ok) {
        double lo_exp = log_lo, hi_exp = log_hi;
        if (ok(std::pow(10.0, hi_exp))) {
            return std::pow(10.0, hi_exp);  // capped at the search ceiling
        }
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo_exp + hi_exp);
            (ok(std::pow(10.0, mid)) ? lo_exp : hi_exp) = mid;
        }
        return std::pow(10.0, lo_exp);
    };

    RamanFitResult fit;
    fit.kappa_lo = bisect_largest([&](double k) { return drop_at(k) < drop_limit; });
    fit.kappa_hi = bisect_largest(positive_at_high);
    if (fit.kappa_hi < fit.kappa_lo) {
        throw InfeasibleError("raman_coefficient", fit.kappa_hi, fit.kappa_lo,
                              "no coefficient satisfies both power-sweep constraints");
    }
    fit.recommended = std::sqrt(fit.kappa_lo * fit.kappa_hi);
    fit.drop_at_100mw_default = drop_at(scenario.raman_coefficient_w_per_nm_mw);
    fit.secure_at_2000mw_default =
        secure_finite_at(scenario, scenario.raman_coefficient_w_per_nm_mw, probe_high_mw);
    return fit;
}

void SessionSpec::validate() const {
    if (!(duration_hours > 0.0)) {
        throw InvariantError("session.duration_hours: must be > 0");
    }
    if (!(qber_mean > 0.0 && qber_mean < 0.5)) {
        throw InvariantError("session.qber_mean: must be in (0, 0.5)");
    }
    if (!(qber_std >= 0.0 && qber_std < qber_mean)) {
        throw InvariantError("session.qber_std: must satisfy 0 <= std < mean");
    }
}

SessionResult emulate_session(const Scenario& scenario, const SessionSpec& spec) {
    spec.validate();
    const SimResult base = simulate_point(scenario);
    if (!(base.rate.sifted_rate_bps > 0.0)) {
        throw InvariantError("session: scenario yields no sifted bits");
    }

    const double block_duration_s =
        static_cast<double>(scenario.protocol.block_size_sifted) / base.rate.sifted_rate_bps;
    const auto n_blocks = static_cast<std::int64_t>(
        std::floor(spec.duration_hours * 3600.0 / block_duration_s));

    const double y0 = base.gains.background_y0;
    const double smooth = base.gains.q_mu - y0;  // 1 - exp(-eta*mu)

    SessionResult session;
    session.blocks.resize(static_cast<std::size_t>(n_blocks));

    detail::parallel_for(static_cast<std::size_t>(n_blocks), [&](std::size_t i) {
        // Independent per-block stream so the series is identical for any
        // thread count.
        std::uint64_t state = spec.rng_seed + 0x9E3779B97F4A7C15ULL * (i + 1);

        double qber = spec.qber_mean;
        if (spec.qber_std > 0.0) {
            do {
                qber = spec.qber_mean + spec.qber_std * detail::normal_draw(state);
            } while (qber < 0.0 || qber > 0.5);
        }

        // Re-derive the intrinsic error for this block; gains do not depend
        // on it, so sifted rate and block duration stay fixed.
        const double e_opt =
            std::clamp((qber * base.gains.q_mu - 0.5 * y0) / smooth, 0.0, 0.1);
        ProtocolParams p = scenario.protocol;
        p.e_opt = e_opt;

        GainErrorTable table = base.gains;
        table.e_mu = (0.5 * y0 + e_opt * smooth) / table.q_mu;
        table.e_nu = (0.5 * y0 + e_opt * (table.q_nu - y0)) / table.q_nu;

        const DecoyEstimate est = decoy_bounds(p, table);
        const RateResult rate = secure_key_rate(p, table, est, base.rate.sifted_rate_bps);

        session.blocks[i] = {static_cast<double>(i) * block_duration_s, qber,
                             rate.secure_rate_finite_bps};
    });

    auto& summary = session.summary;
    summary.blocks = n_blocks;
    summary.block_duration_s = block_duration_s;
    if (n_blocks > 0) {
        double qsum = 0.0, ssum = 0.0;
        for (const auto& b : session.blocks) {
            qsum += b.qber;
            ssum += b.secure_finite_bps;
        }
        summary.qber_mean = qsum / static_cast<double>(n_blocks);
        summary.secure_mean_bps = ssum / static_cast<double>(n_blocks);
        if (n_blocks > 1) {
            double qvar = 0.0, svar = 0.0;
            for (const auto& b : session.blocks) {
                qvar += (b.qber - summary.qber_mean) * (b.qber - summary.qber_mean);
                svar += (b.secure_finite_bps - summary.secure_mean_bps) *
                        (b.secure_finite_bps - summary.secure_mean_bps);
            }
            summary.qber_std = std::sqrt(qvar / static_cast<double>(n_blocks - 1));
            summary.secure_std_bps = std::sqrt(svar / static_cast<double>(n_blocks - 1));
        }

        // Histogram of instantaneous QBERs, fixed 16 bins around the spec mean.
        const double half_span = std::max(4.0 * spec.qber_std, 1e-6);
        const double lo_edge = std::max(0.0, spec.qber_mean - half_span);
        const double hi_edge = std::min(0.5, spec.qber_mean + half_span);
        constexpr int bins = 16;
        summary.qber_hist_edges.resize(bins + 1);
        summary.qber_hist_counts.assign(bins, 0);
        for (int b = 0; b <= bins; ++b) {
            summary.qber_hist_edges[static_cast<std::size_t>(b)] =
                lo_edge + (hi_edge - lo_edge) * b / bins;
        }
        for (const auto& blk : session.blocks) {
            if (blk.qber < lo_edge || blk.qber >= hi_edge) continue;
            auto bin = static_cast<std::size_t>((blk.qber - lo_edge) / (hi_edge - lo_edge) *
                                                bins);
            bin = std::min<std::size_t>(bin, bins - 1);
            ++summary.qber_hist_counts[bin];
        }
    }
    return session;
}

BandwidthPlan plan_bandwidth(int cores, int channels_per_core_per_direction,
                             double power_per_channel_mw, double rate_per_channel_gbps) {
    if (cores < 1 || channels_per_core_per_direction < 1 ||
        !(power_per_channel_mw > 0.0) || !(rate_per_channel_gbps > 0.0)) {
        throw std::invalid_argument("plan_bandwidth: all inputs must be positive");
    }
    BandwidthPlan plan;
    plan.power_per_direction_mw =
        cores * channels_per_core_per_direction * power_per_channel_mw;
    plan.aggregate_bidirectional_tbps =
        cores * (2.0 * channels_per_core_per_direction) * rate_per_channel_gbps / 1000.0;
    return plan;
}

namespace detail {

int engine_thread_budget() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("SIM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            return static_cast<int>(std::min<long>(v, hw));
        }
    }
    return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  int threads_override) {
    if (n == 0) return;
    std::size_t workers = threads_override > 0 ? static_cast<std::size_t>(threads_override)
                                               : static_cast<std::size_t>(engine_thread_budget());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double normal_draw(std::uint64_t& state) {
    // Box-Muller on 53-bit uniforms; u1 in (0, 1], u2 in [0, 1).
    const double u1 =
        (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace detail

}  // namespace mcfqkd
