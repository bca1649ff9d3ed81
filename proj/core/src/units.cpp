#include "mcfqkd/units.hpp"

#include <stdexcept>

namespace mcfqkd {

double OpticalPower::dbm() const {
    if (watts <= 0.0) {
        throw std::invalid_argument("OpticalPower::dbm: defined only for watts > 0");
    }
    return 10.0 * std::log10(watts * 1e3);
}

OpticalPower OpticalPower::from_dbm(double dbm) {
    return {std::pow(10.0, dbm / 10.0) * 1e-3};
}

LinearRatio db_to_linear(Decibel x) {
    if (!std::isfinite(x.value)) {
        throw std::invalid_argument("db_to_linear: non-finite input");
    }
    return {std::pow(10.0, x.value / 10.0)};
}

Decibel linear_to_db(LinearRatio r) {
    if (!(r.value > 0.0) || !std::isfinite(r.value)) {
        throw std::invalid_argument("linear_to_db: requires a finite positive ratio");
    }
    return {10.0 * std::log10(r.value)};
}

double photon_energy_j(Wavelength lambda) {
    if (!(lambda.nanometers > 0.0)) {
        throw std::invalid_argument("photon_energy_j: wavelength must be > 0");
    }
    return constants::planck_js * constants::light_speed_m_s / lambda.meters();
}

double photon_rate_per_s(OpticalPower p, Wavelength lambda) {
    if (p.watts < 0.0) {
        throw std::invalid_argument("photon_rate_per_s: power must be >= 0");
    }
    return p.watts / photon_energy_j(lambda);
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("binary_entropy: p must be in [0, 1]");
    }
    if (p == 0.0 || p == 1.0) {
        return 0.0;
    }
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

}  // namespace mcfqkd
