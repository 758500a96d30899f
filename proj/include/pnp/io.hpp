#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "pnp/config.hpp"
#include "pnp/diagnostics.hpp"
#include "pnp/grid.hpp"

namespace pnp {

/// 17 significant digits: enough for a binary round trip of any double.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Whole-file atomic write: temporary file in the same directory, then rename.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw NumericalError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out) throw NumericalError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw NumericalError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " +
                             ec.message());
}

/// Comment lines echoing the resolved configuration, embedded in every output.
inline std::vector<std::string> config_echo(const RunConfig& cfg) {
    std::vector<std::string> lines;
    auto add = [&lines](const std::string& key, const std::string& value) {
        lines.push_back("# " + key + " = " + value);
    };
    auto join = [](std::span<const double> values) {
        std::string s;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) s += ",";
            s += format_g17(values[i]);
        }
        return s;
    };
    lines.push_back(std::string("# artifact = ") + artifact_name + " " + artifact_version);
    add("mode", to_string(cfg.mode));
    add("chi1", format_g17(cfg.params.chi1));
    add("chi2", format_g17(cfg.params.chi2));
    add("etaPrime", format_g17(cfg.params.eta_prime));
    add("epsPrime", format_g17(cfg.eps_prime_value));
    add("rho0Prime", format_g17(cfg.rho0_prime_value));
    add("phiMinus", format_g17(cfg.params.phi_minus));
    add("phiPlus", format_g17(cfg.params.phi_plus));
    add("z", join(cfg.params.z));
    add("dPrime", join(cfg.params.d_prime));
    add("cInit", join(cfg.params.c_init));
    add("cRef", join(cfg.params.c_ref));
    add("J", std::to_string(cfg.intervals));
    add("dt", format_g17(cfg.stepper.dt));
    add("gamma", format_g17(cfg.stepper.gamma));
    add("innerIterations", std::to_string(cfg.stepper.inner_iterations));
    add("scheme", to_string(cfg.stepper.scheme));
    add("tEnd", format_g17(cfg.stepper.t_end));
    if (!cfg.snapshot_times.empty()) add("snapshotTimes", join(cfg.snapshot_times));
    add("sampleEvery", std::to_string(cfg.sample_every));
    if (cfg.mode == RunMode::TemporalOrder || cfg.mode == RunMode::SpatialOrder) {
        add("probeX", format_g17(cfg.probe_x));
        add("probeT", format_g17(cfg.probe_t));
    }
    if (cfg.mode == RunMode::TemporalOrder) add("baseDts", join(cfg.base_dts));
    if (cfg.mode == RunMode::Sweep) {
        add("sweepParameter", cfg.sweep_parameter);
        add("sweepValues", join(cfg.sweep_values));
    }
    return lines;
}

/// Node profiles at one instant: x, every species, potential.
inline void write_snapshot(const FieldState& state, const Grid& grid,
                           std::span<const std::string> header,
                           const std::filesystem::path& path) {
    std::string out;
    for (const auto& line : header) out += line + "\n";
    out += "# t = " + format_g17(state.t) + "\n";
    out += "x";
    for (std::size_t i = 0; i < state.c.size(); ++i) out += ",c_" + std::to_string(i + 1);
    out += ",phi\n";
    for (std::size_t j = 0; j < grid.n_nodes(); ++j) {
        out += format_g17(grid.nodes[j]);
        for (const auto& ci : state.c) out += "," + format_g17(ci[j]);
        out += "," + format_g17(state.phi[j]) + "\n";
    }
    write_text_atomic(path, out);
}

/// Diagnostics time series. Undefined energies appear as nan.
inline void write_timeseries(const DiagnosticsRecord& record, std::size_t n_species,
                             std::span<const std::string> header,
                             const std::filesystem::path& path) {
    std::string out;
    for (const auto& line : header) out += line + "\n";
    out += "t";
    for (std::size_t i = 0; i < n_species; ++i) out += ",ctot_" + std::to_string(i + 1);
    out += ",energy,dissipation_rhs,max_dcdt,min_c\n";
    for (const auto& s : record.samples) {
        out += format_g17(s.t);
        for (double v : s.c_tot) out += "," + format_g17(v);
        out += "," + format_g17(s.energy);
        out += "," + format_g17(s.dissipation_rhs);
        out += "," + format_g17(s.max_rate);
        out += "," + format_g17(s.min_c) + "\n";
    }
    write_text_atomic(path, out);
}

/// Two-column report, one row per (step, order) estimate.
inline void write_order_report(std::span<const std::pair<double, double>> rows,
                               const std::string& step_label,
                               std::span<const std::string> header,
                               const std::filesystem::path& path) {
    std::string out;
    for (const auto& line : header) out += line + "\n";
    out += step_label + ",order\n";
    for (const auto& [step, order] : rows)
        out += format_g17(step) + "," + format_g17(order) + "\n";
    write_text_atomic(path, out);
}

}  // namespace pnp
