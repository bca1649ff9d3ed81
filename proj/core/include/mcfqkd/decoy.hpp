#pragma once

#include <cstdint>
#include <string>

#include "mcfqkd/receiver.hpp"
#include "mcfqkd/units.hpp"

namespace mcfqkd {

// Decoy-state BB84 protocol settings: signal/decoy/vacuum intensities with
// their emission probabilities, biased basis choice, and the classical
// post-processing factors (error-correction inefficiency, finite-size block).
struct ProtocolParams {
    double clock_hz = 1.0e9;
    double mu = 0.4;   // signal mean photon number, mu > nu
    double nu = 0.1;   // decoy mean photon number, nu >= 0
    double p_mu = 0.9;
    double p_nu = 0.05;
    double p_vacuum = 0.05;
    double basis_prob_z = 0.9;  // both parties
    double e_opt = 0.03;        // intrinsic misalignment/afterpulse error
    double f_ec = 1.16;         // error-correction inefficiency, >= 1
    std::int64_t block_size_sifted = 100000000;

    void validate() const;
};

// Everything the rate formulas need about the physical link.
struct LinkOperatingPoint {
    LinearRatio channel_transmittance;  // in (0, 1], from the loss budget
    DetectorSpec detector;
    NoiseBudget noise;

    void validate() const;
    double total_transmittance() const {
        return channel_transmittance.value * detector.efficiency;
    }
};

// Gains Q_i (click probability per pulse) and QBERs E_i per intensity.
struct GainErrorTable {
    double q_mu = 0.0, e_mu = 0.0;
    double q_nu = 0.0, e_nu = 0.0;
    double q_vacuum = 0.0, e_vacuum = 0.5;
    double background_y0 = 0.0;   // dark + optical noise, per gate
    double eta_total = 0.0;       // channel x detector
    bool degenerate = false;      // q_mu == 0 (dead link)
    bool saturated = false;       // propagated from the noise budget
};

// Vacuum+weak decoy bounds on the single-photon contribution.
struct DecoyEstimate {
    double y1_lower = 0.0;  // single-photon yield lower bound
    double e1_upper = 0.5;  // single-photon error upper bound
    double q1_lower = 0.0;  // = y1_lower * mu * exp(-mu)
    bool zero_key = false;
    std::string reason;
};

struct RateResult {
    double sifted_rate_bps = 0.0;
    double secure_rate_asymptotic_bps = 0.0;
    double secure_rate_finite_bps = 0.0;
    double qber = 0.0;
    DecoyEstimate estimate;
    bool saturated = false;
    std::string diagnostic;
};

// Weak-coherent channel model with background Y0 = dark + noise:
//   Q_i = Y0 + 1 - exp(-eta*i)
//   E_i*Q_i = Y0/2 + e_opt*(1 - exp(-eta*i))
// Background clicks are unpolarized and contribute error 1/2.
GainErrorTable gain_and_error(const ProtocolParams& params, const LinkOperatingPoint& link);

// Standard vacuum+weak two-decoy analytic bounds. Never throws on a weak
// signal: a non-positive yield bound degrades to a zero-key estimate with a
// diagnostic reason.
DecoyEstimate decoy_bounds(const ProtocolParams& params, const GainErrorTable& table);

// Sifted rate: clock * p_mu * Q_mu * (bz^2 + (1-bz)^2).
double sifted_rate_bps(const ProtocolParams& params, const GainErrorTable& table);

// Multiplicative finite-size penalty phi(N) = clamp(1 - 1500/sqrt(N), 0, 1);
// pinned so that phi(1e8) = 0.85.
double finite_size_factor(std::int64_t block_size_sifted);

// GLLP-style secure rate per sifted bit:
//   r = max(0, (q1/Qmu)*(1 - H2(e1)) - f_ec*H2(Emu))
RateResult secure_key_rate(const ProtocolParams& params, const GainErrorTable& table,
                           const DecoyEstimate& estimate, double sifted_bps);

}  // namespace mcfqkd
