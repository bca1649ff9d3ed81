#include "mcfqkd/decoy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcfqkd/errors.hpp"

namespace mcfqkd {

void ProtocolParams::validate() const {
    if (!(clock_hz > 0.0)) {
        throw InvariantError("protocol.clock_hz: must be > 0");
    }
    if (!(mu > nu && nu >= 0.0)) {
        throw InvariantError("protocol: requires mu > nu >= 0");
    }
    const double psum = p_mu + p_nu + p_vacuum;
    if (std::abs(psum - 1.0) > 1e-12) {
        throw InvariantError("protocol: intensity probabilities must sum to 1");
    }
    if (!(p_mu > 0.0 && p_nu >= 0.0 && p_vacuum >= 0.0)) {
        throw InvariantError("protocol: intensity probabilities must be non-negative");
    }
    if (!(basis_prob_z > 0.0 && basis_prob_z < 1.0)) {
        throw InvariantError("protocol.basis_prob_z: must be in (0, 1)");
    }
    if (!(e_opt >= 0.0 && e_opt <= 0.1)) {
        throw InvariantError("protocol.e_opt: must be in [0, 0.1]");
    }
    if (!(f_ec >= 1.0 && f_ec <= 1.5)) {
        throw InvariantError("protocol.f_ec: must be in [1, 1.5]");
    }
    if (block_size_sifted < 1) {
        throw InvariantError("protocol.block_size_sifted: must be >= 1");
    }
}

void LinkOperatingPoint::validate() const {
    if (!(channel_transmittance.value > 0.0 && channel_transmittance.value <= 1.0)) {
        throw InvariantError("link.channel_transmittance: must be in (0, 1]");
    }
    detector.validate();
}

GainErrorTable gain_and_error(const ProtocolParams& params, const LinkOperatingPoint& link) {
    params.validate();
    link.validate();
    const double eta = link.total_transmittance();
    if (!(eta > 0.0)) {
        throw std::invalid_argument("gain_and_error: total transmittance must be > 0");
    }
    const double y0 = link.noise.background_yield();

    GainErrorTable t;
    t.eta_total = eta;
    t.background_y0 = y0;
    t.saturated = link.noise.saturated;

    auto gain = [&](double intensity) { return y0 + 1.0 - std::exp(-eta * intensity); };
    auto error_times_gain = [&](double intensity) {
        return 0.5 * y0 + params.e_opt * (1.0 - std::exp(-eta * intensity));
    };

    t.q_mu = gain(params.mu);
    t.q_nu = gain(params.nu);
    t.q_vacuum = y0;
    t.e_mu = t.q_mu > 0.0 ? error_times_gain(params.mu) / t.q_mu : 0.5;
    t.e_nu = t.q_nu > 0.0 ? error_times_gain(params.nu) / t.q_nu : 0.5;
    t.e_vacuum = 0.5;
    t.degenerate = !(t.q_mu > 0.0);
    return t;
}

DecoyEstimate decoy_bounds(const ProtocolParams& params, const GainErrorTable& table) {
    params.validate();
    const double mu = params.mu;
    const double nu = params.nu;

    DecoyEstimate est;
    if (!(nu > 0.0)) {
        est.zero_key = true;
        est.reason = "decoy intensity nu = 0: no weak decoy to bound the single-photon yield";
        est.y1_lower = 0.0;
        est.e1_upper = 0.5;
        est.q1_lower = 0.0;
        return est;
    }

    const double y0 = table.background_y0;
    const double denom = mu * nu - nu * nu;
    double y1 = (mu / denom) * (table.q_nu * std::exp(nu) -
                                table.q_mu * std::exp(mu) * (nu * nu) / (mu * mu) -
                                ((mu * mu - nu * nu) / (mu * mu)) * y0);
    y1 = std::min(y1, 1.0);
    if (!(y1 > 0.0)) {
        est.zero_key = true;
        est.reason = "single-photon yield lower bound is non-positive at this operating point";
        est.y1_lower = 0.0;
        est.e1_upper = 0.5;
        est.q1_lower = 0.0;
        return est;
    }

    double e1 = (table.e_nu * table.q_nu * std::exp(nu) - 0.5 * y0) / (y1 * nu);
    e1 = std::clamp(e1, 0.0, 0.5);

    est.y1_lower = y1;
    est.e1_upper = e1;
    est.q1_lower = y1 * mu * std::exp(-mu);
    return est;
}

double sifted_rate_bps(const ProtocolParams& params, const GainErrorTable& table) {
    const double bz = params.basis_prob_z;
    const double sift = bz * bz + (1.0 - bz) * (1.0 - bz);
    return params.clock_hz * params.p_mu * table.q_mu * sift;
}

double finite_size_factor(std::int64_t block_size_sifted) {
    if (block_size_sifted < 1) {
        throw std::invalid_argument("finite_size_factor: block size must be >= 1");
    }
    const double phi = 1.0 - 1500.0 / std::sqrt(static_cast<double>(block_size_sifted));
    return std::clamp(phi, 0.0, 1.0);
}

RateResult secure_key_rate(const ProtocolParams& params, const GainErrorTable& table,
                           const DecoyEstimate& estimate, double sifted_bps) {
    params.validate();

    RateResult res;
    res.sifted_rate_bps = sifted_bps;
    res.qber = table.e_mu;
    res.estimate = estimate;
    res.saturated = table.saturated;

    if (table.degenerate) {
        res.diagnostic = "dead link: signal gain is zero";
        return res;
    }
    if (estimate.zero_key) {
        res.diagnostic = estimate.reason;
        return res;
    }

    const double single_photon_term =
        (estimate.q1_lower / table.q_mu) * (1.0 - binary_entropy(estimate.e1_upper));
    const double ec_term = params.f_ec * binary_entropy(table.e_mu);
    const double r = std::max(0.0, single_photon_term - ec_term);

    res.secure_rate_asymptotic_bps = sifted_bps * r;
    res.secure_rate_finite_bps =
        res.secure_rate_asymptotic_bps * finite_size_factor(params.block_size_sifted);
    if (r == 0.0) {
        res.diagnostic = "secure fraction clamped at zero: error correction cost exceeds "
                         "the single-photon contribution";
    }
    return res;
}

}  // namespace mcfqkd
