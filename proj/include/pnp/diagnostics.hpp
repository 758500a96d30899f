#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnp/grid.hpp"
#include "pnp/params.hpp"
#include "pnp/spatial.hpp"

namespace pnp {

/// One measurement instant. Energy and dissipation are NaN with the valid flag
/// cleared when a non-positive concentration makes the logarithms undefined;
/// the run itself continues.
struct DiagnosticsSample {
    double t = 0.0;
    std::vector<double> c_tot;
    double energy = std::numeric_limits<double>::quiet_NaN();
    bool energy_valid = false;
    double dissipation_rhs = std::numeric_limits<double>::quiet_NaN();
    bool dissipation_valid = false;
    double max_rate = 0.0;
    double min_c = 0.0;
};

struct RunInfo {
    std::size_t steps = 0;
    std::size_t negative_concentration_steps = 0;
    double most_negative_concentration = 0.0;
    std::size_t invalid_samples = 0;
    bool under_resolved = false;  ///< dx above the resolution the boundary layers need
    bool stopped_at_steady_state = false;
};

struct DiagnosticsRecord {
    std::vector<DiagnosticsSample> samples;
    RunInfo info;
};

/// Second-order first derivative on the node grid: central differences inside,
/// three-point one-sided stencils at the two ends.
inline std::vector<double> central_gradient(std::span<const double> v, double dx) {
    const std::size_t n = v.size();
    if (n < 3) throw ConfigError("central_gradient: need at least 3 samples");
    std::vector<double> d(n);
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx);
    for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (v[j + 1] - v[j - 1]) / (2.0 * dx);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dx);
    return d;
}

inline double total_concentration(const FieldState& state, std::size_t species, const Grid& grid) {
    return trapezoid(state.c.at(species), grid);
}

/// Dimensionless free energy, normalized by kB T c0 L: the entropy integral
/// plus chi1/(2 chi2) times the gradient-squared electric term and the Robin
/// boundary contribution. Empty when a logarithm would be taken of c <= 0.
inline std::optional<double> total_energy(const FieldState& state,
                                          const DimensionlessParameters& params, const Grid& grid,
                                          const SampledProfiles& prof) {
    const std::size_t n = grid.n_nodes();
    std::vector<double> entropy(n, 0.0);
    for (std::size_t i = 0; i < params.n_species(); ++i) {
        const auto& ci = state.c[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (!(ci[j] > 0.0)) return std::nullopt;
            entropy[j] += ci[j] * std::log(ci[j] / params.c_ref[i]);
        }
    }
    const std::vector<double> grad = central_gradient(state.phi, grid.dx);
    std::vector<double> electric(n);
    for (std::size_t j = 0; j < n; ++j) electric[j] = prof.eps_node[j] * grad[j] * grad[j];
    const double boundary = (prof.eps_node[n - 1] * state.phi[n - 1] * state.phi[n - 1] +
                             prof.eps_node[0] * state.phi[0] * state.phi[0]) /
                            params.eta_prime;
    return trapezoid(entropy, grid) +
           params.chi1 / (2.0 * params.chi2) * (trapezoid(electric, grid) + boundary);
}

/// Same energy written through the charge density instead of the field
/// gradient. The two forms agree up to discretization error; their difference
/// is a useful consistency report.
inline std::optional<double> total_energy_charge_form(const FieldState& state,
                                                      const DimensionlessParameters& params,
                                                      const Grid& grid,
                                                      const SampledProfiles& prof) {
    const std::size_t n = grid.n_nodes();
    std::vector<double> entropy(n, 0.0);
    std::vector<double> charge(n, 0.0);
    for (std::size_t i = 0; i < params.n_species(); ++i) {
        const auto& ci = state.c[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (!(ci[j] > 0.0)) return std::nullopt;
            entropy[j] += ci[j] * std::log(ci[j] / params.c_ref[i]);
            charge[j] += params.z[i] * ci[j];
        }
    }
    std::vector<double> electric(n);
    for (std::size_t j = 0; j < n; ++j)
        electric[j] = (prof.rho0_node[j] + params.chi2 * charge[j]) * state.phi[j];
    const double boundary = (prof.eps_node[n - 1] * params.phi_plus * state.phi[n - 1] +
                             prof.eps_node[0] * params.phi_minus * state.phi[0]) /
                            params.eta_prime;
    return trapezoid(entropy, grid) +
           params.chi1 / (2.0 * params.chi2) * (trapezoid(electric, grid) + boundary);
}

/// mu_i = log(c_i / cRef_i) + 1 + chi1 z_i phi, per node.
inline std::vector<double> chemical_potential(const FieldState& state, std::size_t species,
                                              const DimensionlessParameters& params) {
    const auto& ci = state.c.at(species);
    std::vector<double> mu(ci.size());
    for (std::size_t j = 0; j < ci.size(); ++j) {
        if (!(ci[j] > 0.0))
            throw NumericalError("chemical_potential: non-positive concentration for species " +
                                 std::to_string(species + 1) + " at node " + std::to_string(j));
        mu[j] = std::log(ci[j] / params.c_ref[species]) + 1.0 + params.chi1 * params.z[species] * state.phi[j];
    }
    return mu;
}

/// Right-hand side of the dissipation identity:
/// -integral of sum_i D_i c_i (d mu_i / dx)^2. Always non-positive.
inline double dissipation_rate_rhs(const FieldState& state, const DimensionlessParameters& params,
                                   const Grid& grid) {
    std::vector<double> integrand(grid.n_nodes(), 0.0);
    for (std::size_t i = 0; i < params.n_species(); ++i) {
        const std::vector<double> mu = chemical_potential(state, i, params);
        const std::vector<double> dmu = central_gradient(mu, grid.dx);
        for (std::size_t j = 0; j < integrand.size(); ++j)
            integrand[j] += params.d_prime[i] * state.c[i][j] * dmu[j] * dmu[j];
    }
    return -trapezoid(integrand, grid);
}

/// dE/dt from a uniformly sampled energy series, by the same second-order
/// stencils used in space.
inline std::vector<double> energy_rate_lhs(std::span<const double> times,
                                           std::span<const double> energies) {
    if (times.size() != energies.size())
        throw ConfigError("energy_rate_lhs: time and energy series differ in length");
    if (times.size() < 3) throw ConfigError("energy_rate_lhs: need at least 3 samples");
    const double h = times[1] - times[0];
    if (!(h > 0.0)) throw ConfigError("energy_rate_lhs: sample times must be increasing");
    for (std::size_t k = 1; k + 1 < times.size(); ++k) {
        const double hk = times[k + 1] - times[k];
        if (std::abs(hk - h) > 1e-9 * h)
            throw ConfigError("energy_rate_lhs: sampling cadence is not uniform");
    }
    const std::size_t n = energies.size();
    std::vector<double> d(n);
    d[0] = (-3.0 * energies[0] + 4.0 * energies[1] - energies[2]) / (2.0 * h);
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (energies[k + 1] - energies[k - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * energies[n - 1] - 4.0 * energies[n - 2] + energies[n - 3]) / (2.0 * h);
    return d;
}

/// Largest |dc/dt| over species and nodes, with the transport operator extended
/// to the walls by the conservative half-cell rows regardless of the scheme
/// being time-stepped (it is a measurement, not part of the update).
inline double max_rate_of_change(const FieldState& state, const DimensionlessParameters& params,
                                 const Grid& grid) {
    double worst = 0.0;
    for (std::size_t i = 0; i < params.n_species(); ++i) {
        const BandedSystem m =
            rate_matrix(i, state.phi, BoundaryScheme::Conservative, params, grid);
        const std::vector<double> rate = apply_banded(m, state.c[i]);
        for (double r : rate) worst = std::max(worst, std::abs(r));
    }
    return worst;
}

/// All per-instant measurements in one pass.
inline DiagnosticsSample sample_diagnostics(const FieldState& state,
                                            const DimensionlessParameters& params, const Grid& grid,
                                            const SampledProfiles& prof) {
    DiagnosticsSample s;
    s.t = state.t;
    s.c_tot.resize(params.n_species());
    double min_c = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < params.n_species(); ++i) {
        s.c_tot[i] = total_concentration(state, i, grid);
        min_c = std::min(min_c, *std::min_element(state.c[i].begin(), state.c[i].end()));
    }
    s.min_c = min_c;
    s.max_rate = max_rate_of_change(state, params, grid);
    if (const auto e = total_energy(state, params, grid, prof)) {
        s.energy = *e;
        s.energy_valid = true;
    }
    if (min_c > 0.0) {
        s.dissipation_rhs = dissipation_rate_rhs(state, params, grid);
        s.dissipation_valid = true;
    }
    return s;
}

}  // namespace pnp
