#include "mcfqkd/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "mcfqkd/csv.hpp"
#include "mcfqkd/errors.hpp"

namespace mcfqkd {

namespace {

using json = nlohmann::ordered_json;

int line_of_byte(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& path) {
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) {
            return item.key() == k;
        });
        if (!known) {
            throw UnknownKeyError(path.empty() ? item.key() : path + "." + item.key());
        }
    }
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) {
        throw ParseError("config: " + path + " must be a number");
    }
    return v.get<double>();
}

void get_num(const json& obj, const char* key, double& target, const std::string& path) {
    if (obj.contains(key)) {
        target = as_number(obj.at(key), path + "." + key);
    }
}

// Counts accept any numerically integral value (1e8 parses as a float).
std::int64_t as_integer(const json& v, const std::string& path) {
    if (v.is_number_integer()) {
        return v.get<std::int64_t>();
    }
    if (v.is_number()) {
        const double x = v.get<double>();
        if (x == std::floor(x) && std::abs(x) < 9.0e18) {
            return static_cast<std::int64_t>(x);
        }
    }
    throw ParseError("config: " + path + " must be an integer");
}

void get_int(const json& obj, const char* key, std::int64_t& target, const std::string& path) {
    if (obj.contains(key)) {
        target = as_integer(obj.at(key), path + "." + key);
    }
}

// Per-core fields accept either a scalar (broadcast to every core) or an
// array of core_count entries.
void get_per_core(const json& obj, const char* key, std::vector<double>& target,
                  int core_count, const std::string& path) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string full = path + "." + key;
    if (v.is_number()) {
        target.assign(static_cast<std::size_t>(core_count), v.get<double>());
    } else if (v.is_array()) {
        if (static_cast<int>(v.size()) != core_count) {
            throw InvariantError("config: " + full + " must have core_count entries");
        }
        target.clear();
        for (const auto& x : v) target.push_back(as_number(x, full));
    } else {
        throw ParseError("config: " + full + " must be a number or an array");
    }
}

ClassicalChannel parse_channel(const json& v, const std::string& path) {
    if (!v.is_object()) {
        throw ParseError("config: " + path + " must be an object");
    }
    check_keys(v, {"core", "wavelength_nm", "direction", "launch_mw"}, path);
    ClassicalChannel ch;
    if (!v.contains("core") || !v.contains("wavelength_nm") || !v.contains("direction") ||
        !v.contains("launch_mw")) {
        throw ParseError("config: " + path +
                         " requires core, wavelength_nm, direction, launch_mw");
    }
    ch.core.index = static_cast<int>(as_integer(v.at("core"), path + ".core"));
    ch.wavelength.nanometers = as_number(v.at("wavelength_nm"), path + ".wavelength_nm");
    const std::string dir = v.at("direction").is_string()
                                ? v.at("direction").get<std::string>()
                                : std::string();
    if (dir == "co") {
        ch.direction = Propagation::co;
    } else if (dir == "counter") {
        ch.direction = Propagation::counter;
    } else {
        throw InvariantError("config: " + path + ".direction must be 'co' or 'counter'");
    }
    ch.launch = OpticalPower::from_mw(as_number(v.at("launch_mw"), path + ".launch_mw"));
    return ch;
}

std::string resolve_path(const std::string& base_dir, const std::string& rel) {
    std::filesystem::path p(rel);
    if (p.is_absolute()) return rel;
    return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace

Scenario parse_config(const std::string& text, const std::string& base_dir) {
    Scenario s = reference_scenario();

    // An empty (or whitespace-only) document means "all defaults".
    const bool blank = std::all_of(text.begin(), text.end(), [](unsigned char c) {
        return std::isspace(c) != 0;
    });
    if (blank) {
        s.validate();
        return s;
    }

    json doc;
    try {
        doc = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what(),
                         line_of_byte(text, e.byte > 0 ? e.byte - 1 : 0));
    }
    if (!doc.is_object()) {
        throw ParseError("config: top level must be an object");
    }
    check_keys(doc, {"mode", "fiber", "plan", "filter", "detector", "protocol", "raman"}, "");

    if (doc.contains("mode")) {
        const json& m = doc.at("mode");
        const std::string mode = m.is_string() ? m.get<std::string>() : std::string();
        if (mode == "mcf") {
            s.mode = LinkMode::mcf;
        } else if (mode == "dual_ssmf_control") {
            s.mode = LinkMode::dual_ssmf_control;
        } else {
            throw InvariantError("config: mode must be 'mcf' or 'dual_ssmf_control'");
        }
    }

    if (doc.contains("fiber")) {
        const json& f = doc.at("fiber");
        check_keys(f,
                   {"length_km", "core_count", "attenuation_db_per_km", "excess_loss_db",
                    "fanout_in_db", "fanout_out_db", "leakage_forward_db",
                    "leakage_backward_db", "lumped_attenuation_db"},
                   "fiber");
        if (f.contains("core_count")) {
            std::int64_t n = s.fiber.core_count;
            get_int(f, "core_count", n, "fiber");
            if (n < 1) throw InvariantError("fiber.core_count: must be >= 1");
            s.fiber.core_count = static_cast<int>(n);
            // Re-broadcast the uniform defaults to the new core count.
            for (auto* v : {&s.fiber.attenuation_db_per_km, &s.fiber.excess_loss_db,
                            &s.fiber.fanout_in_db, &s.fiber.fanout_out_db,
                            &s.fiber.leakage_forward_db, &s.fiber.leakage_backward_db}) {
                v->assign(static_cast<std::size_t>(s.fiber.core_count), v->front());
            }
        }
        get_num(f, "length_km", s.fiber.length_km, "fiber");
        get_per_core(f, "attenuation_db_per_km", s.fiber.attenuation_db_per_km,
                     s.fiber.core_count, "fiber");
        get_per_core(f, "excess_loss_db", s.fiber.excess_loss_db, s.fiber.core_count, "fiber");
        get_per_core(f, "fanout_in_db", s.fiber.fanout_in_db, s.fiber.core_count, "fiber");
        get_per_core(f, "fanout_out_db", s.fiber.fanout_out_db, s.fiber.core_count, "fiber");
        get_per_core(f, "leakage_forward_db", s.fiber.leakage_forward_db, s.fiber.core_count,
                     "fiber");
        get_per_core(f, "leakage_backward_db", s.fiber.leakage_backward_db,
                     s.fiber.core_count, "fiber");
        get_num(f, "lumped_attenuation_db", s.fiber.lumped_attenuation_db, "fiber");
    }

    if (doc.contains("plan")) {
        const json& p = doc.at("plan");
        check_keys(p, {"quantum", "data", "auxiliary"}, "plan");
        if (p.contains("quantum")) {
            const json& q = p.at("quantum");
            check_keys(q, {"core", "wavelength_nm"}, "plan.quantum");
            if (q.contains("core")) {
                s.plan.quantum.core.index =
                    static_cast<int>(as_integer(q.at("core"), "plan.quantum.core"));
            }
            if (q.contains("wavelength_nm")) {
                s.plan.quantum.wavelength.nanometers =
                    as_number(q.at("wavelength_nm"), "plan.quantum.wavelength_nm");
            }
        }
        for (const char* list_key : {"data", "auxiliary"}) {
            if (!p.contains(list_key)) continue;
            const json& arr = p.at(list_key);
            if (!arr.is_array()) {
                throw ParseError(std::string("config: plan.") + list_key + " must be an array");
            }
            auto& target = std::string(list_key) == "data" ? s.plan.data : s.plan.auxiliary;
            target.clear();
            int i = 0;
            for (const auto& item : arr) {
                target.push_back(parse_channel(
                    item, std::string("plan.") + list_key + "[" + std::to_string(i++) + "]"));
            }
        }
    }

    if (doc.contains("filter")) {
        const json& f = doc.at("filter");
        check_keys(f, {"center_nm", "passband_nm", "insertion_loss_db", "isolation_db"},
                   "filter");
        get_num(f, "center_nm", s.filter.center.nanometers, "filter");
        get_num(f, "passband_nm", s.filter.passband_nm, "filter");
        get_num(f, "insertion_loss_db", s.filter.insertion_loss_db, "filter");
        get_num(f, "isolation_db", s.filter.out_of_band_isolation_db, "filter");
    }

    if (doc.contains("detector")) {
        const json& d = doc.at("detector");
        check_keys(d, {"efficiency", "dark_count_prob_per_gate", "gate_width_s", "clock_hz"},
                   "detector");
        get_num(d, "efficiency", s.detector.efficiency, "detector");
        get_num(d, "dark_count_prob_per_gate", s.detector.dark_count_prob_per_gate,
                "detector");
        get_num(d, "gate_width_s", s.detector.gate_width_s, "detector");
        get_num(d, "clock_hz", s.detector.clock_hz, "detector");
    }

    if (doc.contains("protocol")) {
        const json& p = doc.at("protocol");
        check_keys(p,
                   {"clock_hz", "mu", "nu", "p_mu", "p_nu", "p_vacuum", "basis_prob_z",
                    "e_opt", "f_ec", "block_size_sifted"},
                   "protocol");
        get_num(p, "clock_hz", s.protocol.clock_hz, "protocol");
        get_num(p, "mu", s.protocol.mu, "protocol");
        get_num(p, "nu", s.protocol.nu, "protocol");
        get_num(p, "p_mu", s.protocol.p_mu, "protocol");
        get_num(p, "p_nu", s.protocol.p_nu, "protocol");
        get_num(p, "p_vacuum", s.protocol.p_vacuum, "protocol");
        get_num(p, "basis_prob_z", s.protocol.basis_prob_z, "protocol");
        get_num(p, "e_opt", s.protocol.e_opt, "protocol");
        get_num(p, "f_ec", s.protocol.f_ec, "protocol");
        get_int(p, "block_size_sifted", s.protocol.block_size_sifted, "protocol");
    }

    if (doc.contains("raman")) {
        const json& r = doc.at("raman");
        check_keys(r, {"coefficient_w_per_nm_mw", "spectrum_csv", "rayleigh_offset_db"},
                   "raman");
        if (r.contains("coefficient_w_per_nm_mw") && r.contains("spectrum_csv")) {
            throw InvariantError(
                "config: raman.coefficient_w_per_nm_mw and raman.spectrum_csv are mutually "
                "exclusive");
        }
        if (r.contains("rayleigh_offset_db") && !r.contains("spectrum_csv")) {
            throw InvariantError("config: raman.rayleigh_offset_db requires raman.spectrum_csv");
        }
        if (r.contains("spectrum_csv")) {
            if (!r.at("spectrum_csv").is_string()) {
                throw ParseError("config: raman.spectrum_csv must be a string path");
            }
            double offset = default_rayleigh_offset_db;
            get_num(r, "rayleigh_offset_db", offset, "raman");
            const RamanSpectrum intracore = ingest_spectrum_csv(
                resolve_path(base_dir, r.at("spectrum_csv").get<std::string>()));
            s.raman_coefficient_w_per_nm_mw =
                worst_case_raman_coefficient(derive_intercore_spectrum(intracore, offset));
        } else {
            get_num(r, "coefficient_w_per_nm_mw", s.raman_coefficient_w_per_nm_mw, "raman");
        }
    }

    s.validate();
    return s;
}

Scenario load_config(const std::string& path) {
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_config(read_text_file(path), dir.empty() ? "." : dir);
}

std::string save_config(const Scenario& s) {
    json doc;
    doc["mode"] = s.mode == LinkMode::mcf ? "mcf" : "dual_ssmf_control";

    json fiber;
    fiber["length_km"] = s.fiber.length_km;
    fiber["core_count"] = s.fiber.core_count;
    fiber["attenuation_db_per_km"] = s.fiber.attenuation_db_per_km;
    fiber["excess_loss_db"] = s.fiber.excess_loss_db;
    fiber["fanout_in_db"] = s.fiber.fanout_in_db;
    fiber["fanout_out_db"] = s.fiber.fanout_out_db;
    fiber["leakage_forward_db"] = s.fiber.leakage_forward_db;
    fiber["leakage_backward_db"] = s.fiber.leakage_backward_db;
    fiber["lumped_attenuation_db"] = s.fiber.lumped_attenuation_db;
    doc["fiber"] = std::move(fiber);

    auto channel_to_json = [](const ClassicalChannel& ch) {
        json c;
        c["core"] = ch.core.index;
        c["wavelength_nm"] = ch.wavelength.nanometers;
        c["direction"] = ch.direction == Propagation::co ? "co" : "counter";
        c["launch_mw"] = ch.launch.milliwatts();
        return c;
    };
    json plan;
    plan["quantum"] = {{"core", s.plan.quantum.core.index},
                       {"wavelength_nm", s.plan.quantum.wavelength.nanometers}};
    plan["data"] = json::array();
    for (const auto& ch : s.plan.data) plan["data"].push_back(channel_to_json(ch));
    plan["auxiliary"] = json::array();
    for (const auto& ch : s.plan.auxiliary) plan["auxiliary"].push_back(channel_to_json(ch));
    doc["plan"] = std::move(plan);

    doc["filter"] = {{"center_nm", s.filter.center.nanometers},
                     {"passband_nm", s.filter.passband_nm},
                     {"insertion_loss_db", s.filter.insertion_loss_db},
                     {"isolation_db", s.filter.out_of_band_isolation_db}};
    doc["detector"] = {{"efficiency", s.detector.efficiency},
                       {"dark_count_prob_per_gate", s.detector.dark_count_prob_per_gate},
                       {"gate_width_s", s.detector.gate_width_s},
                       {"clock_hz", s.detector.clock_hz}};
    doc["protocol"] = {{"clock_hz", s.protocol.clock_hz},
                       {"mu", s.protocol.mu},
                       {"nu", s.protocol.nu},
                       {"p_mu", s.protocol.p_mu},
                       {"p_nu", s.protocol.p_nu},
                       {"p_vacuum", s.protocol.p_vacuum},
                       {"basis_prob_z", s.protocol.basis_prob_z},
                       {"e_opt", s.protocol.e_opt},
                       {"f_ec", s.protocol.f_ec},
                       {"block_size_sifted", s.protocol.block_size_sifted}};
    doc["raman"] = {{"coefficient_w_per_nm_mw", s.raman_coefficient_w_per_nm_mw}};
    return doc.dump(2) + "\n";
}

void write_config(const std::string& path, const Scenario& scenario) {
    write_text_file(path, save_config(scenario));
}

std::uint64_t config_hash(const Scenario& scenario) {
    const std::string text = save_config(scenario);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash_hex(const Scenario& scenario) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(scenario)));
    return buf;
}

RamanSpectrum parse_spectrum_csv(const std::string& text) {
    RamanSpectrum spectrum;
    bool have_launch = false, have_length = false, have_direction = false;
    bool header_seen = false;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string meta = line.substr(1);
            meta.erase(0, meta.find_first_not_of(' '));
            const auto eq = meta.find('=');
            if (eq == std::string::npos) continue;  // plain comment
            const std::string key = meta.substr(0, eq);
            const std::string value = meta.substr(eq + 1);
            try {
                if (key == "launch_dbm") {
                    spectrum.launch_power_dbm = std::stod(value);
                    have_launch = true;
                } else if (key == "length_km") {
                    spectrum.fiber_length_km = std::stod(value);
                    have_length = true;
                } else if (key == "direction") {
                    if (value == "forward") {
                        spectrum.direction = ScatterDirection::forward;
                    } else if (value == "backward") {
                        spectrum.direction = ScatterDirection::backward;
                    } else {
                        throw ParseError("spectrum: direction must be forward|backward",
                                         lineno);
                    }
                    have_direction = true;
                } else {
                    throw ParseError("spectrum: unknown metadata key '" + key + "'", lineno);
                }
            } catch (const std::invalid_argument&) {
                throw ParseError("spectrum: bad metadata value for '" + key + "'", lineno);
            }
            continue;
        }
        if (!header_seen) {
            if (line != "wavelength_nm,density_dbm_per_nm") {
                throw ParseError(
                    "spectrum: expected header 'wavelength_nm,density_dbm_per_nm'", lineno);
            }
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError("spectrum: expected 'wavelength,density'", lineno);
        }
        try {
            RamanSample sample;
            sample.wavelength_nm = std::stod(line.substr(0, comma));
            sample.density_dbm_per_nm = std::stod(line.substr(comma + 1));
            spectrum.samples.push_back(sample);
        } catch (const std::exception&) {
            throw ParseError("spectrum: bad sample row", lineno);
        }
    }

    if (!header_seen) {
        throw ParseError("spectrum: missing header row");
    }
    if (!have_launch || !have_length || !have_direction) {
        throw ParseError(
            "spectrum: missing metadata (need # launch_dbm=, # length_km=, # direction=)");
    }
    spectrum.validate();  // >= 2 samples, strictly increasing wavelengths
    return spectrum;
}

RamanSpectrum ingest_spectrum_csv(const std::string& path) {
    return parse_spectrum_csv(read_text_file(path));
}

std::string spectrum_to_csv(const RamanSpectrum& spectrum) {
    std::ostringstream out;
    out << "# launch_dbm=" << format_double(spectrum.launch_power_dbm) << "\n";
    out << "# length_km=" << format_double(spectrum.fiber_length_km) << "\n";
    out << "# direction="
        << (spectrum.direction == ScatterDirection::forward ? "forward" : "backward") << "\n";
    out << "wavelength_nm,density_dbm_per_nm\n";
    for (const auto& s : spectrum.samples) {
        out << format_double(s.wavelength_nm) << "," << format_double(s.density_dbm_per_nm)
            << "\n";
    }
    return out.str();
}

}  // namespace mcfqkd
