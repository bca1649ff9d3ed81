#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "mcfqkd/engine.hpp"
#include "mcfqkd/errors.hpp"

using namespace mcfqkd;

namespace {

Scenario calibrated_default() {
    static const Scenario cal =
        calibrate_baseline(reference_scenario(), CalibrationTargets{}).scenario;
    return cal;
}

}  // namespace

TEST_CASE("default scenario reproduces the loss budget and baseline") {
    const Scenario s = reference_scenario();
    const SimResult r = simulate_point(s);
    CHECK(r.loss.total_db == doctest::Approx(14.10).epsilon(1e-9));
    CHECK(r.loss.fiber_db == doctest::Approx(12.40).epsilon(1e-9));
    CHECK(r.loss.fanout_db == doctest::Approx(1.10).epsilon(1e-12));
    CHECK(r.loss.filter_db == doctest::Approx(0.60).epsilon(1e-12));
}

TEST_CASE("calibration hits the measured operating point") {
    const CalibrationResult cal =
        calibrate_baseline(reference_scenario(), CalibrationTargets{});

    CHECK(cal.report.fitted_efficiency > 0.15);
    CHECK(cal.report.fitted_efficiency < 0.30);
    CHECK(cal.report.fitted_efficiency == doctest::Approx(0.234238).epsilon(1e-3));
    CHECK(cal.report.fitted_e_opt > 0.02);
    CHECK(cal.report.fitted_e_opt < 0.04);
    CHECK(cal.report.fitted_e_opt == doctest::Approx(0.0310363).epsilon(1e-3));
    CHECK(cal.report.fitted_f_ec > 1.05);
    CHECK(cal.report.fitted_f_ec < 1.25);
    CHECK(cal.report.fitted_f_ec == doctest::Approx(1.10122).epsilon(1e-3));
    CHECK(cal.report.residual_sifted_rel < 0.01);
    CHECK(cal.report.residual_qber_abs < 0.0001);
    CHECK(cal.report.residual_secure_rel < 0.01);

    // the calibrated scenario with the 2 x 1 mW data channels still sits on
    // the reference numbers
    const SimResult r = simulate_point(cal.scenario);
    CHECK(r.rate.sifted_rate_bps == doctest::Approx(2.7e6).epsilon(0.01));
    CHECK(std::abs(r.rate.qber - 0.0336) < 0.0005);
    CHECK(r.rate.secure_rate_finite_bps > 620e3);
    CHECK(r.rate.secure_rate_finite_bps < 634e3);
}

TEST_CASE("calibration is idempotent") {
    const Scenario cal = calibrated_default();
    const CalibrationResult again = calibrate_baseline(cal, CalibrationTargets{});
    CHECK(again.scenario.detector.efficiency ==
          doctest::Approx(cal.detector.efficiency).epsilon(1e-4));
    CHECK(again.scenario.protocol.e_opt == doctest::Approx(cal.protocol.e_opt).epsilon(1e-4));
    CHECK(again.scenario.protocol.f_ec == doctest::Approx(cal.protocol.f_ec).epsilon(1e-4));
}

TEST_CASE("impossible targets raise infeasible errors") {
    SUBCASE("sifted rate above the clock") {
        CalibrationTargets t;
        t.sifted_rate_bps = 2e9;
        CHECK_THROWS_AS(calibrate_baseline(reference_scenario(), t), InfeasibleError);
    }
    SUBCASE("qber below the dark-count floor") {
        CalibrationTargets t;
        t.qber = 1e-6;
        CHECK_THROWS_AS(calibrate_baseline(reference_scenario(), t), InfeasibleError);
    }
    SUBCASE("secure rate beyond f_ec reach") {
        CalibrationTargets t;
        t.secure_finite_bps = 900e3;
        CHECK_THROWS_AS(calibrate_baseline(reference_scenario(), t), InfeasibleError);
    }
    SUBCASE("error names the offending target") {
        CalibrationTargets t;
        t.sifted_rate_bps = 2e9;
        try {
            calibrate_baseline(reference_scenario(), t);
            FAIL("expected InfeasibleError");
        } catch (const InfeasibleError& e) {
            CHECK(e.target() == "sifted_rate_bps");
            CHECK(e.achievable_hi() < 2e9);
        }
    }
}

TEST_CASE("control experiment matches the zero-crosstalk MCF point") {
    const Scenario mcf = calibrated_default();
    const Scenario control = control_scenario_from(mcf);

    // the lumped attenuator reproduces the MCF loss budget exactly
    const SimResult rc = simulate_point(control);
    CHECK(rc.loss.total_db == doctest::Approx(14.10).epsilon(1e-9));
    CHECK(rc.noise.noise_count_prob_per_gate == 0.0);

    Scenario quiet = mcf;
    for (auto& ch : quiet.plan.data) ch.launch = {0.0};
    const SimResult rq = simulate_point(quiet);

    CHECK(rc.rate.sifted_rate_bps ==
          doctest::Approx(rq.rate.sifted_rate_bps).epsilon(0.005));
    CHECK(rc.rate.secure_rate_finite_bps ==
          doctest::Approx(rq.rate.secure_rate_finite_bps).epsilon(0.005));
    CHECK(rc.rate.secure_rate_asymptotic_bps ==
          doctest::Approx(rq.rate.secure_rate_asymptotic_bps).epsilon(0.005));

    // both sit in the measured consistency band
    CHECK(rc.rate.secure_rate_finite_bps > 600e3);
    CHECK(rc.rate.secure_rate_finite_bps < 640e3);
    CHECK(rq.rate.secure_rate_finite_bps > 600e3);
    CHECK(rq.rate.secure_rate_finite_bps < 640e3);
}

TEST_CASE("zero noise and zero error gives zero QBER") {
    Scenario s = reference_scenario();
    for (auto& ch : s.plan.data) ch.launch = {0.0};
    s.detector.dark_count_prob_per_gate = 0.0;
    s.protocol.e_opt = 0.0;
    const SimResult r = simulate_point(s);
    CHECK(r.rate.qber == 0.0);
}

TEST_CASE("power sweep satisfies the reference power constraints") {
    const Scenario s = calibrated_default();
    SweepSpec spec;
    spec.power_min_mw = 2.0;
    spec.power_max_mw = 3000.0;
    spec.points = 50;
    spec.scale = SweepSpec::Scale::log;
    const auto sweep = sweep_power(s, spec);
    REQUIRE(sweep.size() == 50);
    CHECK(sweep.front().combined_power_mw == doctest::Approx(2.0));
    CHECK(sweep.back().combined_power_mw == doctest::Approx(3000.0));

    const double base = sweep.front().result.rate.secure_rate_finite_bps;
    REQUIRE(base > 0.0);
    for (const auto& p : sweep) {
        if (p.combined_power_mw <= 100.0) {
            CHECK(p.result.rate.secure_rate_finite_bps > 0.95 * base);
        }
        if (p.combined_power_mw >= 640.0) {
            // positive key at the planning point and beyond 1 W per direction
            if (p.combined_power_mw <= 2000.0) {
                CHECK(p.result.rate.secure_rate_finite_bps > 0.0);
            }
        }
    }

    // monotone pointwise: QBER up, secure rate down
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        CHECK(sweep[i].result.rate.qber >= sweep[i - 1].result.rate.qber - 1e-15);
        CHECK(sweep[i].result.rate.secure_rate_finite_bps <=
              sweep[i - 1].result.rate.secure_rate_finite_bps + 1e-9);
    }

    // explicit 2000 mW point (1 W per direction)
    Scenario at2w = s;
    for (auto& ch : at2w.plan.data) ch.launch = OpticalPower::from_mw(1000.0);
    CHECK(simulate_point(at2w).rate.secure_rate_finite_bps > 0.0);
}

TEST_CASE("sweep results are identical for serial and parallel execution") {
    const Scenario s = calibrated_default();
    SweepSpec spec;
    spec.power_min_mw = 2.0;
    spec.power_max_mw = 3000.0;
    spec.points = 24;
    spec.scale = SweepSpec::Scale::log;

    // SIM_THREADS caps the worker pool; 1 forces a serial pass
    const auto run = [&] {
        std::vector<double> out;
        for (const auto& p : sweep_power(s, spec)) {
            out.push_back(p.result.rate.secure_rate_finite_bps);
        }
        return out;
    };
    setenv("SIM_THREADS", "1", 1);
    const std::vector<double> serial = run();
    setenv("SIM_THREADS", "4", 1);
    const std::vector<double> parallel = run();
    unsetenv("SIM_THREADS");

    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i] == parallel[i]);  // bit identical
    }
}

TEST_CASE("sweep rescales data channels only, auxiliary power stays fixed") {
    Scenario s = calibrated_default();
    s.plan.auxiliary = {{{2}, {1551.12}, Propagation::co, OpticalPower::from_mw(0.5)}};
    SweepSpec spec;
    spec.power_min_mw = 2.0;
    spec.power_max_mw = 8.0;
    spec.points = 2;
    spec.scale = SweepSpec::Scale::linear;
    const auto sweep = sweep_power(s, spec);
    // raman power tracks combined data power plus the constant 0.5 mW aux
    const double kappa = s.raman_coefficient_w_per_nm_mw;
    CHECK(sweep[0].result.noise.raman_in_band_w.watts ==
          doctest::Approx(kappa * 0.4 * 2.5 * std::pow(10.0, -0.06)).epsilon(1e-9));
    CHECK(sweep[1].result.noise.raman_in_band_w.watts ==
          doctest::Approx(kappa * 0.4 * 8.5 * std::pow(10.0, -0.06)).epsilon(1e-9));
}

TEST_CASE("raman coefficient fit brackets the default") {
    const Scenario s = calibrated_default();
    const RamanFitResult fit = fit_raman_coefficient(s);
    CHECK(fit.kappa_lo > 0.0);
    CHECK(fit.kappa_lo <= default_raman_coefficient);
    CHECK(fit.kappa_hi >= default_raman_coefficient);
    CHECK(fit.recommended == doctest::Approx(std::sqrt(fit.kappa_lo * fit.kappa_hi)));

    // with kappa = 0 the 100 mW drop vanishes (leakage alone is negligible)
    Scenario no_raman = s;
    no_raman.raman_coefficient_w_per_nm_mw = 0.0;
    const RamanFitResult fit0 = fit_raman_coefficient(no_raman);
    CHECK(fit0.drop_at_100mw_default < 0.001);
}

TEST_CASE("saturation flag propagates from the noise budget to the rate") {
    Scenario s = calibrated_default();
    for (auto& ch : s.plan.data) ch.launch = OpticalPower::from_mw(1.0e7);
    const SimResult r = simulate_point(s);
    CHECK(r.noise.saturated);
    CHECK(r.rate.saturated);
    CHECK(r.rate.secure_rate_finite_bps == 0.0);  // dephased far past any key
}

TEST_CASE("fit interval tightens as dark counts rise") {
    const Scenario s = calibrated_default();
    const RamanFitResult base = fit_raman_coefficient(s);

    Scenario dark_heavy = s;
    dark_heavy.detector.dark_count_prob_per_gate = 2e-4;
    const RamanFitResult heavy = fit_raman_coefficient(dark_heavy);

    // a dark-dominated link sits closer to the kill threshold, so both edges
    // move down; intervals stay non-empty either way
    CHECK(heavy.kappa_hi <= base.kappa_hi);
    CHECK(heavy.kappa_lo <= base.kappa_lo);
    CHECK(heavy.kappa_lo < heavy.kappa_hi);
    CHECK(base.kappa_lo < base.kappa_hi);
}

TEST_CASE("session emulation statistics and reproducibility") {
    const Scenario s = calibrated_default();
    SessionSpec spec;
    spec.duration_hours = 24.0;
    spec.qber_mean = 0.0336;
    spec.qber_std = 0.0054;
    spec.rng_seed = 1;

    const SessionResult a = emulate_session(s, spec);
    CHECK(a.summary.block_duration_s > 36.0);
    CHECK(a.summary.block_duration_s < 38.0);
    CHECK(a.summary.blocks > 2300);
    CHECK(a.summary.blocks < 2420);
    CHECK(std::abs(a.summary.qber_mean - 0.0336) < 0.001);
    CHECK(std::abs(a.summary.qber_std - 0.0054) < 0.0015);
    CHECK(a.summary.secure_mean_bps > 575e3);
    CHECK(a.summary.secure_mean_bps < 635e3);

    // same seed: bit-identical series, also when forced serial
    setenv("SIM_THREADS", "1", 1);
    const SessionResult b = emulate_session(s, spec);
    unsetenv("SIM_THREADS");
    REQUIRE(a.blocks.size() == b.blocks.size());
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        CHECK(a.blocks[i].qber == b.blocks[i].qber);
        CHECK(a.blocks[i].secure_finite_bps == b.blocks[i].secure_finite_bps);
    }

    // different seed: different draws, same statistics within ~3 standard errors
    SessionSpec other = spec;
    other.rng_seed = 99;
    const SessionResult c = emulate_session(s, other);
    bool any_difference = false;
    for (std::size_t i = 0; i < std::min(a.blocks.size(), c.blocks.size()); ++i) {
        if (a.blocks[i].qber != c.blocks[i].qber) any_difference = true;
    }
    CHECK(any_difference);
    const double se_mean = 0.0054 / std::sqrt(static_cast<double>(c.summary.blocks));
    CHECK(std::abs(c.summary.qber_mean - 0.0336) < 3.5 * se_mean);
    const double se_std = 0.0054 / std::sqrt(2.0 * static_cast<double>(c.summary.blocks));
    CHECK(std::abs(c.summary.qber_std - 0.0054) < 3.5 * se_std);

    // histogram covers every in-range draw
    std::int64_t histogram_total = 0;
    for (const auto n : a.summary.qber_hist_counts) histogram_total += n;
    CHECK(histogram_total > 0);
    CHECK(histogram_total <= a.summary.blocks);
}

TEST_CASE("degenerate session with zero spread equals the single-point result") {
    const Scenario s = calibrated_default();
    const SimResult base = simulate_point(s);
    SessionSpec spec;
    spec.duration_hours = 1.0;
    spec.qber_mean = base.rate.qber;
    spec.qber_std = 0.0;
    spec.rng_seed = 7;
    const SessionResult session = emulate_session(s, spec);
    REQUIRE(!session.blocks.empty());
    for (const auto& blk : session.blocks) {
        CHECK(blk.qber == doctest::Approx(base.rate.qber).epsilon(1e-12));
        CHECK(blk.secure_finite_bps ==
              doctest::Approx(base.rate.secure_rate_finite_bps).epsilon(1e-9));
    }
}

TEST_CASE("session spec validation") {
    SessionSpec spec;
    spec.qber_std = 0.05;  // std >= mean
    spec.qber_mean = 0.03;
    CHECK_THROWS_AS(spec.validate(), InvariantError);
    spec = SessionSpec{};
    spec.duration_hours = 0.0;
    CHECK_THROWS_AS(spec.validate(), InvariantError);
}

TEST_CASE("bandwidth planning arithmetic") {
    const BandwidthPlan plan = plan_bandwidth(5, 64, 1.0, 10.0);
    CHECK(plan.power_per_direction_mw == doctest::Approx(320.0));
    CHECK(plan.aggregate_bidirectional_tbps == doctest::Approx(6.4));

    const BandwidthPlan unit = plan_bandwidth(1, 1, 1.0, 10.0);
    CHECK(unit.power_per_direction_mw == doctest::Approx(1.0));
    CHECK(unit.aggregate_bidirectional_tbps == doctest::Approx(0.02));

    CHECK_THROWS_AS(plan_bandwidth(0, 64, 1.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(plan_bandwidth(5, 64, -1.0, 10.0), std::invalid_argument);

    // the planned 640 mW combined point still yields a positive key
    Scenario s = calibrated_default();
    for (auto& ch : s.plan.data) {
        ch.launch = OpticalPower::from_mw(2.0 * plan.power_per_direction_mw /
                                          static_cast<double>(s.plan.data.size()));
    }
    CHECK(simulate_point(s).rate.secure_rate_finite_bps > 0.0);
}

TEST_CASE("sweep spec validation") {
    SweepSpec spec;
    spec.power_min_mw = 10.0;
    spec.power_max_mw = 2.0;
    spec.points = 10;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.power_max_mw = 20.0;
    spec.points = 1;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
