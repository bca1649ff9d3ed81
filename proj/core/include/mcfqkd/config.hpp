#pragma once

#include <cstdint>
#include <string>

#include "mcfqkd/engine.hpp"

namespace mcfqkd {

// Loads a scenario from a JSON config. Missing sections and keys take the
// reference defaults; unknown keys are hard errors (strict mode); invariant
// violations name the offending key. An empty file yields the all-defaults
// scenario. Relative spectrum paths resolve against the config's directory.
Scenario load_config(const std::string& path);

// Same, from text; `base_dir` anchors relative spectrum paths.
Scenario parse_config(const std::string& text, const std::string& base_dir = ".");

// Canonical serialization: every field explicit, so the written file doubles
// as a fully documented example of the schema. load(save(s)) == s.
std::string save_config(const Scenario& scenario);
void write_config(const std::string& path, const Scenario& scenario);

// FNV-1a over the canonical serialization; printed with every run.
std::uint64_t config_hash(const Scenario& scenario);
std::string config_hash_hex(const Scenario& scenario);

// Spectrum CSV: '# launch_dbm=', '# length_km=', '# direction=' metadata
// lines plus a 'wavelength_nm,density_dbm_per_nm' table.
RamanSpectrum ingest_spectrum_csv(const std::string& path);
RamanSpectrum parse_spectrum_csv(const std::string& text);
std::string spectrum_to_csv(const RamanSpectrum& spectrum);

}  // namespace mcfqkd
