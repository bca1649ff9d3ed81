#pragma once

#include <cmath>

namespace mcfqkd {

// CODATA/SI exact values, embedded rather than configurable so that every
// reported number is reproducible from the source alone.
namespace constants {
inline constexpr double planck_js = 6.62607015e-34;       // J*s
inline constexpr double light_speed_m_s = 299792458.0;    // m/s
}  // namespace constants

// Power ratio expressed in dB. Negative values attenuate.
struct Decibel {
    double value = 0.0;
};

// Dimensionless linear power ratio, >= 0.
struct LinearRatio {
    double value = 0.0;
};

struct OpticalPower {
    double watts = 0.0;

    // dBm accessor is defined only for strictly positive power.
    double dbm() const;
    static OpticalPower from_dbm(double dbm);
    static OpticalPower from_mw(double mw) { return {mw * 1e-3}; }
    double milliwatts() const { return watts * 1e3; }
};

struct Wavelength {
    double nanometers = 0.0;

    double meters() const { return nanometers * 1e-9; }
};

LinearRatio db_to_linear(Decibel x);
Decibel linear_to_db(LinearRatio r);

// Energy of one photon at the given wavelength, in joules.
double photon_energy_j(Wavelength lambda);

// Photon flux carried by an optical power, in 1/s. Linear in power.
double photon_rate_per_s(OpticalPower p, Wavelength lambda);

// Binary Shannon entropy H2(p), with H2(0) = H2(1) = 0 by continuity.
double binary_entropy(double p);

}  // namespace mcfqkd
