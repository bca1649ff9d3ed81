#include "mcfqkd/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcfqkd/errors.hpp"

namespace mcfqkd {

namespace {

void require_per_core(const std::vector<double>& v, int core_count, const char* name) {
    if (static_cast<int>(v.size()) != core_count) {
        throw InvariantError(std::string("fiber.") + name + ": expected " +
                             std::to_string(core_count) + " per-core entries, got " +
                             std::to_string(v.size()));
    }
}

void check_core(const FiberSpec& fiber, CoreId core, const char* who) {
    if (core.index < 0 || core.index >= fiber.core_count) {
        throw std::invalid_argument(std::string(who) + ": core index " +
                                    std::to_string(core.index) + " out of range [0, " +
                                    std::to_string(fiber.core_count) + ")");
    }
}

}  // namespace

void FiberSpec::validate() const {
    if (!(length_km >= 0.0)) {
        throw InvariantError("fiber.length_km: must be >= 0");
    }
    if (core_count < 1) {
        throw InvariantError("fiber.core_count: must be >= 1");
    }
    require_per_core(attenuation_db_per_km, core_count, "attenuation_db_per_km");
    require_per_core(excess_loss_db, core_count, "excess_loss_db");
    require_per_core(fanout_in_db, core_count, "fanout_in_db");
    require_per_core(fanout_out_db, core_count, "fanout_out_db");
    require_per_core(leakage_forward_db, core_count, "leakage_forward_db");
    require_per_core(leakage_backward_db, core_count, "leakage_backward_db");
    for (double a : attenuation_db_per_km) {
        if (!(a > 0.0)) throw InvariantError("fiber.attenuation_db_per_km: must be > 0");
    }
    for (const auto* loss : {&excess_loss_db, &fanout_in_db, &fanout_out_db}) {
        for (double v : *loss) {
            if (!(v >= 0.0)) throw InvariantError("fiber: losses must be >= 0 dB");
        }
    }
    // Guard against misconfigured near-unity coupling; entry 0 (central core
    // into itself) is ignored.
    for (const auto* m : {&leakage_forward_db, &leakage_backward_db}) {
        for (int i = 1; i < core_count; ++i) {
            if (!((*m)[i] <= -20.0)) {
                throw InvariantError("fiber.leakage: entries must be <= -20 dB");
            }
        }
    }
    if (!(lumped_attenuation_db >= 0.0)) {
        throw InvariantError("fiber.lumped_attenuation_db: must be >= 0");
    }
}

void RamanSpectrum::validate() const {
    if (samples.size() < 2) {
        throw InvariantError("raman spectrum: needs at least 2 samples");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].density_dbm_per_nm)) {
            throw InvariantError("raman spectrum: densities must be finite");
        }
        if (i > 0 && !(samples[i].wavelength_nm > samples[i - 1].wavelength_nm)) {
            throw InvariantError("raman spectrum: wavelengths must be strictly increasing");
        }
    }
}

bool RamanSpectrum::covers(Wavelength lambda) const {
    if (samples.size() < 2) return false;
    return samples.front().wavelength_nm <= lambda.nanometers &&
           lambda.nanometers <= samples.back().wavelength_nm;
}

std::vector<ClassicalChannel> ChannelPlan::all_classical() const {
    std::vector<ClassicalChannel> all = data;
    all.insert(all.end(), auxiliary.begin(), auxiliary.end());
    return all;
}

double ChannelPlan::total_classical_launch_mw() const {
    double mw = 0.0;
    for (const auto& ch : data) mw += ch.launch.milliwatts();
    for (const auto& ch : auxiliary) mw += ch.launch.milliwatts();
    return mw;
}

void ChannelPlan::validate(const FiberSpec& fiber) const {
    check_core(fiber, quantum.core, "plan.quantum");
    if (!(quantum.wavelength.nanometers > 0.0)) {
        throw InvariantError("plan.quantum.wavelength_nm: must be > 0");
    }
    constexpr double dwdm_grid_nm = 0.8;
    for (const auto& ch : all_classical()) {
        check_core(fiber, ch.core, "plan.classical");
        if (ch.core.index == quantum.core.index) {
            throw InvariantError("plan: quantum core " + std::to_string(ch.core.index) +
                                 " must not carry classical channels");
        }
        if (std::abs(ch.wavelength.nanometers - quantum.wavelength.nanometers) <
            dwdm_grid_nm) {
            throw InvariantError(
                "plan: classical wavelength within one DWDM grid spacing (0.8 nm) of the "
                "quantum wavelength");
        }
        if (ch.launch.watts < 0.0) {
            throw InvariantError("plan: launch power must be >= 0");
        }
    }
}

LossBudget quantum_loss_budget(const FiberSpec& fiber, const ChannelPlan& plan,
                               double filter_insertion_db) {
    fiber.validate();
    check_core(fiber, plan.quantum.core, "quantum_path_loss");
    const int q = plan.quantum.core.index;
    LossBudget b;
    b.fiber_db = fiber.length_km * fiber.attenuation_db_per_km[q] + fiber.excess_loss_db[q];
    b.fanout_db = fiber.fanout_in_db[q] + fiber.fanout_out_db[q];
    b.filter_db = filter_insertion_db;
    b.lumped_db = fiber.lumped_attenuation_db;
    b.total_db = b.fiber_db + b.fanout_db + b.filter_db + b.lumped_db;
    return b;
}

Decibel quantum_path_loss_db(const FiberSpec& fiber, const ChannelPlan& plan,
                             double filter_insertion_db) {
    return {quantum_loss_budget(fiber, plan, filter_insertion_db).total_db};
}

std::vector<LeakageContribution> leakage_power_at_receiver(const FiberSpec& fiber,
                                                           const ChannelPlan& plan) {
    fiber.validate();
    plan.validate(fiber);
    std::vector<LeakageContribution> out;
    for (const auto& ch : plan.all_classical()) {
        const auto& matrix = ch.direction == Propagation::co ? fiber.leakage_forward_db
                                                             : fiber.leakage_backward_db;
        const double ratio = db_to_linear({matrix[ch.core.index]}).value;
        out.push_back({ch.core, ch.wavelength, ch.direction, {ch.launch.watts * ratio}});
    }
    return out;
}

RamanSpectrum derive_intercore_spectrum(const RamanSpectrum& intracore,
                                        double rayleigh_offset_db) {
    intracore.validate();
    if (rayleigh_offset_db < 0.0) {
        throw std::invalid_argument("derive_intercore_spectrum: offset must be >= 0 dB");
    }
    RamanSpectrum inter = intracore;
    for (auto& s : inter.samples) {
        s.density_dbm_per_nm -= rayleigh_offset_db;
    }
    return inter;
}

double worst_case_raman_coefficient(const RamanSpectrum& intercore) {
    intercore.validate();
    const double launch_mw = std::pow(10.0, intercore.launch_power_dbm / 10.0);
    if (!(launch_mw > 0.0)) {
        throw std::invalid_argument("worst_case_raman_coefficient: launch power must be > 0");
    }
    double max_density_w_per_nm = 0.0;
    for (const auto& s : intercore.samples) {
        const double w_per_nm = std::pow(10.0, s.density_dbm_per_nm / 10.0) * 1e-3;
        max_density_w_per_nm = std::max(max_density_w_per_nm, w_per_nm);
    }
    return max_density_w_per_nm / launch_mw;
}

OpticalPower raman_inband_power(double kappa_r_w_per_nm_mw, const ChannelPlan& plan,
                                double passband_nm) {
    if (kappa_r_w_per_nm_mw < 0.0) {
        throw std::invalid_argument("raman_inband_power: kappa must be >= 0");
    }
    if (!(passband_nm > 0.0)) {
        throw std::invalid_argument("raman_inband_power: passband must be > 0 nm");
    }
    return {kappa_r_w_per_nm_mw * passband_nm * plan.total_classical_launch_mw()};
}

RamanSpectrum default_intracore_spectrum() {
    // Piecewise-linear silica backscatter envelope, 0 dBm launch, 53 km. The
    // peak density is pinned so that (peak - 40 dB) converts to exactly the
    // default coefficient at 1 mW launch: 10*log10(5e-13 mW/nm) = -123.0103.
    RamanSpectrum s;
    s.launch_power_dbm = 0.0;
    s.fiber_length_km = 53.0;
    s.direction = ScatterDirection::backward;
    const double peak_dbm_per_nm = -123.0102999566398 + default_rayleigh_offset_db;
    s.samples = {
        {1450.0, -98.0},
        {1480.0, -92.0},
        {1520.0, -87.5},
        {1547.72, -84.6},
        {1565.0, peak_dbm_per_nm},
        {1600.0, -86.0},
        {1650.0, -92.5},
    };
    return s;
}

}  // namespace mcfqkd
