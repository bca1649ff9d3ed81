#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcfqkd/decoy.hpp"
#include "mcfqkd/fiber.hpp"
#include "mcfqkd/receiver.hpp"
#include "mcfqkd/units.hpp"

namespace mcfqkd {

enum class LinkMode { mcf, dual_ssmf_control };

// A complete, self-contained operating point of the simulator. Immutable in
// use: every engine operation returns new values.
struct Scenario {
    FiberSpec fiber;
    ChannelPlan plan;
    FilterSpec filter;
    DetectorSpec detector;
    ProtocolParams protocol;
    double raman_coefficient_w_per_nm_mw = default_raman_coefficient;
    LinkMode mode = LinkMode::mcf;

    void validate() const;
};

// The measured 53 km 7-core link: quantum channel in the central core at
// 1547.72 nm, two 0 dBm 1552.72 nm data channels in opposite directions.
Scenario reference_scenario();

// Dual-SSMF control: quantum and classical signals in physically separate
// 50 km fibers (zero crosstalk), with a lumped attenuator matching the MCF
// quantum-path loss budget.
Scenario control_scenario_from(const Scenario& mcf);

struct SimResult {
    LossBudget loss;
    NoiseBudget noise;
    GainErrorTable gains;
    RateResult rate;
};

// Deterministic composition: loss budget -> noise budget -> gains -> decoy
// bounds -> secure rate. Zero-key outcomes come back as results with a
// diagnostic, not as errors. In control mode crosstalk is forced to zero.
SimResult simulate_point(const Scenario& scenario);

struct SweepSpec {
    double power_min_mw = 0.0;
    double power_max_mw = 0.0;
    int points = 2;
    enum class Scale { log, linear } scale = Scale::log;

    void validate() const;
};

struct SweepPoint {
    double combined_power_mw = 0.0;
    SimResult result;
};

// Rescales the data channels to an equal split of each grid total (both
// directions included in "combined") and evaluates every point. Auxiliary
// channels are left untouched. Points are independent and evaluated in
// parallel; output order matches the grid.
std::vector<SweepPoint> sweep_power(const Scenario& scenario, const SweepSpec& sweep);

struct CalibrationTargets {
    double sifted_rate_bps = 2.7e6;
    double qber = 0.0336;
    std::optional<double> secure_finite_bps = 627e3;
};

struct CalibrationReport {
    double fitted_efficiency = 0.0;
    double fitted_e_opt = 0.0;
    double fitted_f_ec = 0.0;
    double residual_sifted_rel = 0.0;
    double residual_qber_abs = 0.0;
    double residual_secure_rel = 0.0;
    int efficiency_iterations = 0;
    int f_ec_iterations = 0;
    std::string notes;
};

struct CalibrationResult {
    Scenario scenario;  // input scenario with the three fitted parameters replaced
    CalibrationReport report;
};

// Three-stage deterministic fit at zero data power:
//   1. detector efficiency by bisection against the sifted-rate target
//      (sifted rate is independent of e_opt and f_ec),
//   2. e_opt in closed form from the QBER decomposition,
//   3. f_ec by bisection in [1.05, 1.25] against the secure-rate target.
// Unreachable targets raise InfeasibleError naming the target and the
// achievable range.
CalibrationResult calibrate_baseline(const Scenario& scenario,
                                     const CalibrationTargets& targets);

struct RamanFitResult {
    double kappa_lo = 0.0;   // largest kappa with < 1% rate drop at 100 mW combined
    double kappa_hi = 0.0;   // largest kappa with positive key at 2000 mW combined
    double recommended = 0.0;  // geometric mean
    double drop_at_100mw_default = 0.0;     // with the scenario's own kappa
    double secure_at_2000mw_default = 0.0;  // with the scenario's own kappa
};

// Feasibility fit for the worst-case Raman coefficient against the two
// reference power-sweep constraints. Raises InfeasibleError when no kappa
// satisfies both (kappa_hi < kappa_lo would mean the calibrated baseline is
// inconsistent with the sweep behavior).
RamanFitResult fit_raman_coefficient(const Scenario& scenario);

struct SessionSpec {
    double duration_hours = 24.0;
    double qber_mean = 0.0336;
    double qber_std = 0.0054;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct SessionBlock {
    double timestamp_s = 0.0;  // block start
    double qber = 0.0;
    double secure_finite_bps = 0.0;
};

struct SessionSummary {
    std::int64_t blocks = 0;
    double block_duration_s = 0.0;
    double qber_mean = 0.0;
    double qber_std = 0.0;
    double secure_mean_bps = 0.0;
    double secure_std_bps = 0.0;
    std::vector<double> qber_hist_edges;   // bin edges, size bins+1
    std::vector<std::int64_t> qber_hist_counts;
};

struct SessionResult {
    std::vector<SessionBlock> blocks;
    SessionSummary summary;
};

// Long-run emulation: per block of block_size_sifted bits, draw the QBER
// from a truncated normal, re-derive the intrinsic error for that block and
// recompute the secure rate. Same seed gives bit-identical series regardless
// of thread count.
SessionResult emulate_session(const Scenario& scenario, const SessionSpec& spec);

struct BandwidthPlan {
    double power_per_direction_mw = 0.0;
    double aggregate_bidirectional_tbps = 0.0;
};

// DWDM planning arithmetic: power per direction and total bidirectional
// throughput for a fully populated system.
BandwidthPlan plan_bandwidth(int cores, int channels_per_core_per_direction,
                             double power_per_channel_mw, double rate_per_channel_gbps);

namespace detail {

// Worker-pool map over [0, n): each index is computed into its own slot, so
// assembly is order-independent and results are deterministic for any thread
// count. Thread budget comes from SIM_THREADS (>= 1) capped at hardware
// concurrency; `threads_override` > 0 bypasses the environment.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  int threads_override = 0);

int engine_thread_budget();

// SplitMix64 stream; used to derive independent per-block generators.
std::uint64_t splitmix64(std::uint64_t& state);

// Standard normal draw via Box-Muller on explicit 53-bit uniforms.
double normal_draw(std::uint64_t& state);

}  // namespace detail

}  // namespace mcfqkd
