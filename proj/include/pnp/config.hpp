#pragma once

#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pnp/errors.hpp"
#include "pnp/params.hpp"
#include "pnp/spatial.hpp"
#include "pnp/stepper.hpp"

namespace pnp {

inline constexpr const char* artifact_name = "pnp1d";
inline constexpr const char* artifact_version = "0.1.0";

enum class RunMode { Simulate, TemporalOrder, SpatialOrder, Compare, PBValidate, Sweep };

inline const char* to_string(RunMode m) {
    switch (m) {
        case RunMode::Simulate: return "simulate";
        case RunMode::TemporalOrder: return "temporal-order";
        case RunMode::SpatialOrder: return "spatial-order";
        case RunMode::Compare: return "compare";
        case RunMode::PBValidate: return "pb-validate";
        case RunMode::Sweep: return "sweep";
    }
    return "?";
}

inline RunMode parse_mode(const std::string& v) {
    if (v == "simulate") return RunMode::Simulate;
    if (v == "temporal-order") return RunMode::TemporalOrder;
    if (v == "spatial-order") return RunMode::SpatialOrder;
    if (v == "compare") return RunMode::Compare;
    if (v == "pb-validate") return RunMode::PBValidate;
    if (v == "sweep") return RunMode::Sweep;
    throw ConfigError("unknown mode '" + v + "'");
}

/// Fully resolved run description. The permittivity and fixed-charge values are
/// also kept as plain numbers (the text format only carries constants) so the
/// output headers can echo them.
struct RunConfig {
    RunMode mode = RunMode::Simulate;
    DimensionlessParameters params;
    double eps_prime_value = 1.0;
    double rho0_prime_value = 0.0;
    std::size_t intervals = 0;
    StepperConfig stepper;
    std::vector<double> snapshot_times;
    std::size_t sample_every = 1;
    std::string out_dir;
    double probe_x = 0.904;
    double probe_t = 0.02;
    std::vector<double> base_dts{5e-5, 2.5e-5, 1.25e-5};
    std::string sweep_parameter;
    std::vector<double> sweep_values;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline double parse_double(const std::string& value, const std::string& key, int line) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || trim(std::string_view(end)).size() != 0)
        throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                          "' has a malformed number '" + value + "'");
    return v;
}

inline long parse_integer(const std::string& value, const std::string& key, int line) {
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (end == value.c_str() || trim(std::string_view(end)).size() != 0)
        throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                          "' has a malformed integer '" + value + "'");
    return v;
}

inline std::vector<double> parse_double_list(const std::string& value, const std::string& key,
                                             int line) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        std::size_t comma = value.find(',', start);
        if (comma == std::string::npos) comma = value.size();
        const std::string item = trim(std::string_view(value).substr(start, comma - start));
        if (!item.empty()) out.push_back(parse_double(item, key, line));
        start = comma + 1;
    }
    if (out.empty())
        throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' has an empty list");
    return out;
}

struct Entry {
    int line = 0;
    std::string value;
    bool used = false;
};

/// Key/value store for one config file: flat `key = value` lines, `#` comments,
/// duplicates rejected, untouched keys reported as unknown.
class ConfigMap {
public:
    explicit ConfigMap(std::string_view text) {
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t eol = text.find('\n', pos);
            if (eol == std::string_view::npos) eol = text.size();
            ++line_no;
            std::string line = trim(text.substr(pos, eol - pos));
            pos = eol + 1;
            if (const auto hash = line.find('#'); hash != std::string::npos)
                line = trim(std::string_view(line).substr(0, hash));
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
            const std::string key = trim(std::string_view(line).substr(0, eq));
            const std::string value = trim(std::string_view(line).substr(eq + 1));
            if (key.empty())
                throw ConfigError("line " + std::to_string(line_no) + ": missing key");
            if (entries_.count(key))
                throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
            entries_[key] = Entry{line_no, value, false};
        }
    }

    std::optional<std::pair<std::string, int>> take(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        it->second.used = true;
        return std::make_pair(it->second.value, it->second.line);
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    /// Consumes every `prefix.N` key, N = 1-based contiguous species index.
    std::map<int, std::pair<std::string, int>> take_indexed(const std::string& prefix) {
        std::map<int, std::pair<std::string, int>> out;
        for (auto& [key, entry] : entries_) {
            if (key.size() <= prefix.size() + 1 || key.compare(0, prefix.size(), prefix) != 0 ||
                key[prefix.size()] != '.')
                continue;
            const std::string idx = key.substr(prefix.size() + 1);
            char* end = nullptr;
            const long n = std::strtol(idx.c_str(), &end, 10);
            if (end == idx.c_str() || *end != '\0' || n < 1)
                throw ConfigError("line " + std::to_string(entry.line) + ": bad species index in '" +
                                  key + "'");
            entry.used = true;
            out[static_cast<int>(n)] = {entry.value, entry.line};
        }
        return out;
    }

    bool has_indexed(const std::string& prefix) const {
        for (const auto& [key, entry] : entries_)
            if (key.size() > prefix.size() + 1 && key.compare(0, prefix.size(), prefix) == 0 &&
                key[prefix.size()] == '.')
                return true;
        return false;
    }

    void reject_unknown() const {
        const Entry* first = nullptr;
        const std::string* first_key = nullptr;
        for (const auto& [key, entry] : entries_) {
            if (entry.used) continue;
            if (!first || entry.line < first->line) {
                first = &entry;
                first_key = &key;
            }
        }
        if (first)
            throw ConfigError("line " + std::to_string(first->line) + ": unknown key '" +
                              *first_key + "'");
    }

private:
    std::map<std::string, Entry> entries_;
};

inline std::vector<double> indexed_to_vector(std::map<int, std::pair<std::string, int>> raw,
                                             const std::string& prefix, std::size_t n_species,
                                             double default_value) {
    std::vector<double> out(n_species, default_value);
    for (auto& [index, payload] : raw) {
        if (static_cast<std::size_t>(index) > n_species)
            throw ConfigError("line " + std::to_string(payload.second) + ": species index " +
                              std::to_string(index) + " in '" + prefix + "." +
                              std::to_string(index) + "' exceeds the species count");
        out[index - 1] = parse_double(payload.first, prefix, payload.second);
    }
    return out;
}

}  // namespace detail

/// Parses the flat key = value config format. Unknown keys, duplicate keys and
/// malformed values are hard errors carrying line numbers; missing required
/// keys are reported by name.
inline RunConfig parse_config(std::string_view text) {
    using detail::ConfigMap;
    ConfigMap map(text);
    RunConfig cfg;

    auto take_double = [&](const char* key) -> std::optional<double> {
        if (auto e = map.take(key)) return detail::parse_double(e->first, key, e->second);
        return std::nullopt;
    };
    auto take_size = [&](const char* key) -> std::optional<std::size_t> {
        if (auto e = map.take(key)) {
            const long v = detail::parse_integer(e->first, key, e->second);
            if (v < 0)
                throw ConfigError("line " + std::to_string(e->second) + ": key '" + std::string(key) +
                                  "' must be non-negative");
            return static_cast<std::size_t>(v);
        }
        return std::nullopt;
    };
    auto take_list = [&](const char* key) -> std::optional<std::vector<double>> {
        if (auto e = map.take(key)) return detail::parse_double_list(e->first, key, e->second);
        return std::nullopt;
    };
    auto take_string = [&](const char* key) -> std::optional<std::string> {
        if (auto e = map.take(key)) return e->first;
        return std::nullopt;
    };

    // Read every recognized key first so unknown keys are reported no matter
    // which required ones are missing.
    const auto mode_raw = take_string("mode");
    const auto chi1 = take_double("chi1");
    const auto chi2 = take_double("chi2");
    const auto eta_prime = take_double("etaPrime");
    const auto eps_prime = take_double("epsPrime");
    const auto rho0_prime = take_double("rho0Prime");
    const auto phi_minus = take_double("phiMinus");
    const auto phi_plus = take_double("phiPlus");
    auto species_z = map.take_indexed("z");
    auto d_prime_raw = map.take_indexed("dPrime");
    auto c_ref_raw = map.take_indexed("cRef");
    auto c_init_raw = map.take_indexed("cInit");
    const auto T = take_double("T");
    const auto eps_r = take_double("epsr");
    const auto L = take_double("L");
    const auto c0 = take_double("c0");
    const auto D0 = take_double("D0");
    const auto phi0 = take_double("phi0");
    const auto eta = take_double("eta");
    const auto e_charge = take_double("e");
    const auto kB = take_double("kB");
    const auto eps0 = take_double("eps0");
    const auto eps_t = take_double("epst");
    auto diffusion_raw = map.take_indexed("D");
    const auto intervals = take_size("J");
    const auto dt = take_double("dt");
    const auto gamma = take_double("gamma");
    const auto inner = take_size("innerIterations");
    const auto scheme_raw = map.take("scheme");
    const auto t_end = take_double("tEnd");
    const auto snapshot_times = take_list("snapshotTimes");
    const auto sample_every = take_size("sampleEvery");
    const auto out = take_string("out");
    const auto probe_x = take_double("probeX");
    const auto probe_t = take_double("probeT");
    const auto base_dts = take_list("baseDts");
    const auto sweep_parameter = take_string("sweepParameter");
    const auto sweep_values = take_list("sweepValues");
    map.reject_unknown();

    if (mode_raw) cfg.mode = parse_mode(*mode_raw);

    const bool dimensionless_block = chi1 || chi2 || eta_prime || eps_prime || rho0_prime ||
                                     !d_prime_raw.empty() || !c_ref_raw.empty();
    const bool physical_block = T || eps_r || L || c0 || D0 || phi0 || eta || e_charge || kB ||
                                eps0 || eps_t || !diffusion_raw.empty();
    if (dimensionless_block && physical_block)
        throw ConfigError("config mixes physical and dimensionless parameter blocks");

    if (species_z.empty()) throw ConfigError("missing required key 'z.1' (species valences)");
    const std::size_t n_species = species_z.size();
    for (std::size_t i = 1; i <= n_species; ++i)
        if (!species_z.count(static_cast<int>(i)))
            throw ConfigError("species indices must be contiguous from 1; missing 'z." +
                              std::to_string(i) + "'");
    auto require = [](const std::optional<double>& v, const char* key) {
        if (!v) throw ConfigError(std::string("missing required key '") + key + "'");
        return *v;
    };

    if (physical_block) {
        PhysicalParameters p;
        if (e_charge) p.e = *e_charge;
        if (kB) p.kB = *kB;
        if (T) p.T = *T;
        if (eps0) p.eps0 = *eps0;
        if (eps_r) p.eps_r = *eps_r;
        if (eps_t) p.eps_t = *eps_t;
        if (L) p.L = *L;
        if (c0) p.c0 = *c0;
        if (D0) p.D0 = *D0;
        if (phi0) p.phi0 = *phi0;
        if (eta) p.eta = *eta;
        p.phi_minus = require(phi_minus, "phiMinus");
        p.phi_plus = require(phi_plus, "phiPlus");
        for (std::size_t i = 1; i <= n_species; ++i) {
            IonSpecies s;
            s.valence = detail::parse_double(species_z[static_cast<int>(i)].first, "z",
                                             species_z[static_cast<int>(i)].second);
            s.diffusion = p.D0;
            s.initial_concentration = p.c0;
            if (auto it = diffusion_raw.find(static_cast<int>(i)); it != diffusion_raw.end())
                s.diffusion = detail::parse_double(it->second.first, "D", it->second.second);
            if (auto it = c_init_raw.find(static_cast<int>(i)); it != c_init_raw.end())
                s.initial_concentration =
                    detail::parse_double(it->second.first, "cInit", it->second.second);
            p.species.push_back(s);
        }
        cfg.params = nondimensionalize(p);
        cfg.eps_prime_value = cfg.params.eps_at(0.0);
        cfg.rho0_prime_value = 0.0;
    } else {
        DimensionlessParameters d;
        d.chi1 = require(chi1, "chi1");
        d.chi2 = require(chi2, "chi2");
        d.eta_prime = require(eta_prime, "etaPrime");
        d.phi_minus = require(phi_minus, "phiMinus");
        d.phi_plus = require(phi_plus, "phiPlus");
        cfg.eps_prime_value = eps_prime.value_or(1.0);
        cfg.rho0_prime_value = rho0_prime.value_or(0.0);
        const double eps_v = cfg.eps_prime_value;
        const double rho_v = cfg.rho0_prime_value;
        d.eps_prime = [eps_v](double) { return eps_v; };
        d.rho0_prime = [rho_v](double) { return rho_v; };

        d.z.resize(n_species);
        for (std::size_t i = 1; i <= n_species; ++i)
            d.z[i - 1] = detail::parse_double(species_z[static_cast<int>(i)].first, "z",
                                              species_z[static_cast<int>(i)].second);
        d.d_prime = detail::indexed_to_vector(std::move(d_prime_raw), "dPrime", n_species, 1.0);
        d.c_init = detail::indexed_to_vector(std::move(c_init_raw), "cInit", n_species, 1.0);
        d.c_ref = d.c_init;
        for (auto& [index, payload] : c_ref_raw) {
            if (static_cast<std::size_t>(index) > n_species)
                throw ConfigError("line " + std::to_string(payload.second) +
                                  ": species index out of range in 'cRef'");
            d.c_ref[index - 1] = detail::parse_double(payload.first, "cRef", payload.second);
        }
        d.validate();
        cfg.params = std::move(d);
    }

    if (intervals) cfg.intervals = *intervals;
    if (dt) cfg.stepper.dt = *dt;
    if (gamma) cfg.stepper.gamma = *gamma;
    if (inner) cfg.stepper.inner_iterations = static_cast<int>(*inner);
    if (scheme_raw) {
        if (scheme_raw->first == "conservative") cfg.stepper.scheme = BoundaryScheme::Conservative;
        else if (scheme_raw->first == "standard") cfg.stepper.scheme = BoundaryScheme::Standard;
        else
            throw ConfigError("line " + std::to_string(scheme_raw->second) +
                              ": scheme must be 'conservative' or 'standard', got '" +
                              scheme_raw->first + "'");
    }
    if (t_end) cfg.stepper.t_end = *t_end;
    if (snapshot_times) cfg.snapshot_times = *snapshot_times;
    if (sample_every) cfg.sample_every = *sample_every;
    if (out) cfg.out_dir = *out;
    if (probe_x) cfg.probe_x = *probe_x;
    if (probe_t) cfg.probe_t = *probe_t;
    if (base_dts) cfg.base_dts = *base_dts;
    if (sweep_parameter) cfg.sweep_parameter = *sweep_parameter;
    if (sweep_values) cfg.sweep_values = *sweep_values;

    // Mode-specific requirements and defaults.
    const bool needs_full_numerics = cfg.mode == RunMode::Simulate || cfg.mode == RunMode::Compare ||
                                     cfg.mode == RunMode::Sweep;
    if (needs_full_numerics) {
        if (cfg.intervals == 0) throw ConfigError("missing required key 'J'");
        if (!dt) throw ConfigError("missing required key 'dt'");
        if (!t_end) throw ConfigError("missing required key 'tEnd'");
    } else if (cfg.intervals == 0) {
        cfg.intervals = cfg.mode == RunMode::PBValidate ? 2048 : 1000;
    }
    if (cfg.mode == RunMode::SpatialOrder && !dt) cfg.stepper.dt = 1e-6;
    if (cfg.mode == RunMode::PBValidate && !t_end) cfg.stepper.t_end = 2.0;
    if (cfg.mode == RunMode::Sweep) {
        if (cfg.sweep_parameter != "chi2" && cfg.sweep_parameter != "etaPrime")
            throw ConfigError("sweep mode requires sweepParameter = chi2 or etaPrime");
        if (cfg.sweep_values.empty()) throw ConfigError("missing required key 'sweepValues'");
    }
    if (cfg.sample_every == 0) throw ConfigError("sampleEvery must be positive");
    cfg.stepper.validate();
    return cfg;
}

/// Flag values override config keys one for one.
struct CliOverrides {
    std::optional<double> dt;
    std::optional<std::string> scheme;
    std::optional<int> inner_iterations;
    std::optional<std::size_t> intervals;
    std::optional<double> t_end;
    std::optional<std::string> mode;
    std::optional<std::string> out;
};

inline void apply_overrides(RunConfig& cfg, const CliOverrides& o) {
    if (o.dt) cfg.stepper.dt = *o.dt;
    if (o.scheme) {
        if (*o.scheme == "conservative") cfg.stepper.scheme = BoundaryScheme::Conservative;
        else if (*o.scheme == "standard") cfg.stepper.scheme = BoundaryScheme::Standard;
        else throw ConfigError("--scheme must be 'conservative' or 'standard'");
    }
    if (o.inner_iterations) {
        if (*o.inner_iterations < 0) throw ConfigError("--inner-iterations must be >= 0");
        cfg.stepper.inner_iterations = *o.inner_iterations;
    }
    if (o.intervals) cfg.intervals = *o.intervals;
    if (o.t_end) cfg.stepper.t_end = *o.t_end;
    if (o.mode) cfg.mode = parse_mode(*o.mode);
    if (o.out) cfg.out_dir = *o.out;
    cfg.stepper.validate();
}

}  // namespace pnp
