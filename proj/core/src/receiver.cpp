#include "mcfqkd/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcfqkd/errors.hpp"

namespace mcfqkd {

void FilterSpec::validate() const {
    if (!(center.nanometers > 0.0)) {
        throw InvariantError("filter.center_nm: must be > 0");
    }
    if (!(passband_nm > 0.0 && passband_nm < 10.0)) {
        throw InvariantError("filter.passband_nm: must be in (0, 10)");
    }
    if (!(insertion_loss_db >= 0.0)) {
        throw InvariantError("filter.insertion_loss_db: must be >= 0");
    }
    if (!(out_of_band_isolation_db >= 40.0)) {
        throw InvariantError("filter.isolation_db: must be >= 40 dB");
    }
}

void DetectorSpec::validate() const {
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
        throw InvariantError("detector.efficiency: must be in (0, 1]");
    }
    if (!(dark_count_prob_per_gate >= 0.0 && dark_count_prob_per_gate < 1e-2)) {
        throw InvariantError("detector.dark_count_prob_per_gate: must be in [0, 1e-2)");
    }
    if (!(clock_hz > 0.0)) {
        throw InvariantError("detector.clock_hz: must be > 0");
    }
    if (!(gate_width_s > 0.0 && gate_width_s <= 1.0 / clock_hz)) {
        throw InvariantError("detector.gate_width_s: must be in (0, 1/clock]");
    }
}

LinearRatio filter_transmission(const FilterSpec& filter, Wavelength lambda) {
    if (!(lambda.nanometers > 0.0)) {
        throw std::invalid_argument("filter_transmission: wavelength must be > 0");
    }
    const double detuning = std::abs(lambda.nanometers - filter.center.nanometers);
    double loss_db = filter.insertion_loss_db;
    if (detuning > filter.passband_nm / 2.0) {
        loss_db += filter.out_of_band_isolation_db;
    }
    return db_to_linear({-loss_db});
}

namespace {

double per_source_prob(const OpticalNoiseInput& src, const FilterSpec& filter,
                       const DetectorSpec& det) {
    if (src.power.watts < 0.0) {
        throw std::invalid_argument("noise_count_prob_per_gate: power must be >= 0");
    }
    const double transmission = src.in_band
                                    ? db_to_linear({-filter.insertion_loss_db}).value
                                    : filter_transmission(filter, src.wavelength).value;
    const double rate = photon_rate_per_s({src.power.watts * transmission}, src.wavelength);
    return rate * det.gate_width_s * det.efficiency;
}

}  // namespace

GateProbability noise_count_prob_per_gate(const std::vector<OpticalNoiseInput>& sources,
                                          const FilterSpec& filter,
                                          const DetectorSpec& detector) {
    double survive = 1.0;
    for (const auto& src : sources) {
        const double p = std::min(per_source_prob(src, filter, detector), 1.0);
        survive *= 1.0 - p;
    }
    GateProbability out;
    out.value = 1.0 - survive;
    out.saturated = out.value > 0.5;  // model validity limit, not an error
    return out;
}

NoiseBudget assemble_noise_budget(const FiberSpec& fiber, const ChannelPlan& plan,
                                  const FilterSpec& filter, const DetectorSpec& detector,
                                  double kappa_r_w_per_nm_mw) {
    filter.validate();
    detector.validate();

    std::vector<OpticalNoiseInput> sources;
    for (const auto& leak : leakage_power_at_receiver(fiber, plan)) {
        OpticalNoiseInput in;
        in.label = std::string("leakage core ") + std::to_string(leak.source.index) +
                   (leak.direction == Propagation::co ? " (forward)" : " (backward)");
        in.power = leak.power;
        in.wavelength = leak.wavelength;
        sources.push_back(std::move(in));
    }
    const OpticalPower raman = raman_inband_power(kappa_r_w_per_nm_mw, plan, filter.passband_nm);
    sources.push_back({"raman (worst case)", raman, plan.quantum.wavelength, true});

    NoiseBudget budget;
    budget.dark_count_prob_per_gate = detector.dark_count_prob_per_gate;

    double survive = 1.0;
    for (const auto& src : sources) {
        const double transmission = src.in_band
                                        ? db_to_linear({-filter.insertion_loss_db}).value
                                        : filter_transmission(filter, src.wavelength).value;
        const double p = std::min(per_source_prob(src, filter, detector), 1.0);
        survive *= 1.0 - p;
        budget.breakdown.push_back({src.label, {src.power.watts * transmission}, p});
        if (src.in_band) {
            budget.raman_in_band_w.watts += src.power.watts * transmission;
        } else {
            budget.leakage_in_band_w.watts += src.power.watts * transmission;
        }
    }
    budget.noise_count_prob_per_gate = 1.0 - survive;
    budget.saturated =
        budget.noise_count_prob_per_gate + budget.dark_count_prob_per_gate > 0.5;
    std::sort(budget.breakdown.begin(), budget.breakdown.end(),
              [](const NoiseSourceEntry& a, const NoiseSourceEntry& b) {
                  return a.prob_per_gate > b.prob_per_gate;
              });
    return budget;
}

}  // namespace mcfqkd
