#pragma once

#include <string>
#include <vector>

#include "mcfqkd/fiber.hpp"
#include "mcfqkd/units.hpp"

namespace mcfqkd {

// Rectangular DWDM filter: insertion loss inside [center +- passband/2],
// insertion + isolation outside. Roll-off shoulders are folded into the
// configurable isolation.
struct FilterSpec {
    Wavelength center;
    double passband_nm = 0.4;
    double insertion_loss_db = 0.6;
    double out_of_band_isolation_db = 80.0;

    void validate() const;
};

// Gated InGaAs single-photon detector parameters.
struct DetectorSpec {
    double efficiency = 0.2;                  // in (0, 1]
    double dark_count_prob_per_gate = 2.0e-5; // in [0, 1e-2)
    double gate_width_s = 1.5e-10;            // <= 1/clock
    double clock_hz = 1.0e9;

    void validate() const;
};

LinearRatio filter_transmission(const FilterSpec& filter, Wavelength lambda);

// One optical noise source arriving at the receiver, pre-filter. In-band
// sources (Raman) bypass the isolation branch but still pay insertion loss.
struct OpticalNoiseInput {
    std::string label;
    OpticalPower power;
    Wavelength wavelength;
    bool in_band = false;
};

struct GateProbability {
    double value = 0.0;
    bool saturated = false;  // set when the combined probability exceeds 0.5
};

// Converts optical noise powers into a per-gate count probability:
// p_i = photon_rate(power * transmission) * gate_width * efficiency,
// combined coincidence-safe as 1 - prod(1 - p_i).
GateProbability noise_count_prob_per_gate(const std::vector<OpticalNoiseInput>& sources,
                                          const FilterSpec& filter,
                                          const DetectorSpec& detector);

struct NoiseSourceEntry {
    std::string label;
    OpticalPower power_at_detector;  // post-filter
    double prob_per_gate = 0.0;
};

struct NoiseBudget {
    OpticalPower leakage_in_band_w;   // total leakage power past the filter
    OpticalPower raman_in_band_w;     // worst-case Raman power past insertion loss
    double noise_count_prob_per_gate = 0.0;
    double dark_count_prob_per_gate = 0.0;
    std::vector<NoiseSourceEntry> breakdown;  // sorted by probability, descending
    bool saturated = false;

    double background_yield() const {
        return noise_count_prob_per_gate + dark_count_prob_per_gate;
    }
};

// End-to-end composition: leakage + worst-case Raman -> per-gate optical
// noise probability, plus the detector's own dark counts.
NoiseBudget assemble_noise_budget(const FiberSpec& fiber, const ChannelPlan& plan,
                                  const FilterSpec& filter, const DetectorSpec& detector,
                                  double kappa_r_w_per_nm_mw);

}  // namespace mcfqkd
