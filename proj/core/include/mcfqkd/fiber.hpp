#pragma once

#include <vector>

#include "mcfqkd/units.hpp"

namespace mcfqkd {

// Core index into the multicore fiber; index 0 is the central core by
// convention and carries the quantum channel.
struct CoreId {
    int index = 0;
};

// Static description of the multicore fiber plant. Per-core quantities are
// vectors of length core_count. Leakage entries give the dB ratio of power
// exiting the central core to power launched into the source core, measured
// end to end (entry [0] is the central core itself and is ignored).
struct FiberSpec {
    double length_km = 0.0;
    int core_count = 1;
    std::vector<double> attenuation_db_per_km;  // > 0, per core
    std::vector<double> excess_loss_db;         // >= 0, per core (splices/connectors)
    std::vector<double> fanout_in_db;           // >= 0, per core, launch end
    std::vector<double> fanout_out_db;          // >= 0, per core, receive end
    std::vector<double> leakage_forward_db;     // <= -20, source core -> central
    std::vector<double> leakage_backward_db;    // <= -20, source core -> central
    // Lumped attenuator on the quantum path; used by the SSMF control setup
    // to match the MCF loss budget.
    double lumped_attenuation_db = 0.0;

    void validate() const;
};

struct RamanSample {
    double wavelength_nm = 0.0;
    double density_dbm_per_nm = 0.0;
};

enum class ScatterDirection { forward, backward };

// Wavelength-resolved backscatter density recorded at a known launch power.
// Wavelengths must be strictly increasing and span the quantum wavelength.
struct RamanSpectrum {
    std::vector<RamanSample> samples;
    double launch_power_dbm = 0.0;
    double fiber_length_km = 0.0;
    ScatterDirection direction = ScatterDirection::backward;

    void validate() const;
    bool covers(Wavelength lambda) const;
};

enum class Propagation { co, counter };

struct ClassicalChannel {
    CoreId core;
    Wavelength wavelength;
    Propagation direction = Propagation::co;
    OpticalPower launch;
};

struct QuantumAssignment {
    CoreId core;
    Wavelength wavelength;
};

// Which core/wavelength carries what. The quantum core must not be shared
// and classical wavelengths must sit at least one DWDM grid spacing away
// from the quantum line.
struct ChannelPlan {
    QuantumAssignment quantum;
    std::vector<ClassicalChannel> data;
    std::vector<ClassicalChannel> auxiliary;

    void validate(const FiberSpec& fiber) const;
    std::vector<ClassicalChannel> all_classical() const;
    double total_classical_launch_mw() const;
};

// Per-term decomposition of the quantum-channel loss budget, in dB.
struct LossBudget {
    double fiber_db = 0.0;    // attenuation * length + excess
    double fanout_db = 0.0;   // both ends
    double filter_db = 0.0;   // DWDM filter insertion
    double lumped_db = 0.0;   // control-experiment attenuator
    double total_db = 0.0;
};

LossBudget quantum_loss_budget(const FiberSpec& fiber, const ChannelPlan& plan,
                               double filter_insertion_db);

// Total quantum-path loss: length*attenuation + excess + both fanouts +
// filter insertion + lumped attenuator.
Decibel quantum_path_loss_db(const FiberSpec& fiber, const ChannelPlan& plan,
                             double filter_insertion_db);

struct LeakageContribution {
    CoreId source;
    Wavelength wavelength;
    Propagation direction = Propagation::co;
    OpticalPower power;  // at central-core output, pre-filter
};

// Same-wavelength leakage from every classical channel into the central
// core. Co-propagating channels use the forward matrix, counter-propagating
// the backward one.
std::vector<LeakageContribution> leakage_power_at_receiver(const FiberSpec& fiber,
                                                           const ChannelPlan& plan);

// Intercore spectrum deduced from an intracore measurement: same spectral
// shape, every density lowered by the inter/intracore Rayleigh peak offset.
RamanSpectrum derive_intercore_spectrum(const RamanSpectrum& intracore,
                                        double rayleigh_offset_db);

// Worst-case Raman coefficient kappa_R in W per nm per mW of launch power:
// the spectral maximum of the (intercore) density normalized to the launch
// power it was recorded at.
double worst_case_raman_coefficient(const RamanSpectrum& intercore);

// In-band Raman power at the quantum receiver under the worst-case rule:
// kappa_R * passband * total classical launch power (all cores, both
// directions). Linear in every launch power.
OpticalPower raman_inband_power(double kappa_r_w_per_nm_mw, const ChannelPlan& plan,
                                double passband_nm);

// Synthetic intracore backscatter envelope (1450-1650 nm) whose
// intercore-derived maximum reproduces the default worst-case coefficient.
// Shape is cosmetic; only the maximum matters in worst-case mode.
RamanSpectrum default_intracore_spectrum();

// Default inter/intracore Rayleigh peak offset, dB.
inline constexpr double default_rayleigh_offset_db = 40.0;

// Default worst-case Raman coefficient, W/nm/mW (see fit-raman for the
// admissible interval this was verified against).
inline constexpr double default_raman_coefficient = 5.0e-16;

}  // namespace mcfqkd
