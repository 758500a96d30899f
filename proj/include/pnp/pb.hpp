#pragma once

#include <cmath>
#include <cstdio>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pnp/banded.hpp"
#include "pnp/errors.hpp"
#include "pnp/grid.hpp"
#include "pnp/params.hpp"
#include "pnp/spatial.hpp"

namespace pnp {

struct PBOptions {
    int max_newton_iterations = 80;
    double newton_tolerance = 1e-13;   ///< max-norm of the dx²-scaled residual
    int max_mass_sweeps = 300;         ///< species couple through phi, so sweeps contract slowly
    double mass_tolerance = 1e-10;     ///< relative per-species mass mismatch
    double max_newton_step = 2.0;      ///< damping cap on the potential update
};

/// Steady state of the transport system: concentrations take the form
/// c_i = A_i exp(-chi1 z_i phi) and phi solves the resulting nonlinear Poisson
/// problem under the same Robin rows as the dynamic solver.
struct PBResult {
    std::vector<double> phi;
    std::vector<std::vector<double>> c;
    std::vector<double> coefficients;  ///< A_i
    int newton_iterations = 0;
    double residual = 0.0;
};

namespace detail {

inline std::vector<std::vector<double>> boltzmann_concentrations(
    std::span<const double> amplitudes, std::span<const double> phi,
    const DimensionlessParameters& params) {
    std::vector<std::vector<double>> c(params.n_species(), std::vector<double>(phi.size()));
    for (std::size_t i = 0; i < params.n_species(); ++i)
        for (std::size_t j = 0; j < phi.size(); ++j)
            c[i][j] = amplitudes[i] * std::exp(-params.chi1 * params.z[i] * phi[j]);
    return c;
}

/// Damped Newton iteration on phi for fixed amplitudes, warm-started from the
/// passed-in potential. Convergence is measured on the dx²-scaled rows, whose
/// round-off floor stays near machine precision at any resolution. Returns the
/// iteration count; throws on non-convergence.
inline int pb_newton(std::vector<double>& phi, std::span<const double> amplitudes,
                     const DimensionlessParameters& params, const Grid& grid,
                     const SampledProfiles& prof, const PBOptions& opts, double* residual_out) {
    const double dx2 = grid.dx * grid.dx;
    for (int it = 0; it < opts.max_newton_iterations; ++it) {
        const auto c = boltzmann_concentrations(amplitudes, phi, params);
        BandedSystem sys = assemble_poisson_system(c, params, grid, prof);
        const std::vector<double> lhs = apply_banded(sys, phi);
        double residual = 0.0;
        std::vector<double> minus_r(phi.size());
        for (std::size_t j = 0; j < phi.size(); ++j) {
            minus_r[j] = sys.rhs[j] - lhs[j];
            residual = std::max(residual, std::abs(minus_r[j]) * dx2);
        }
        if (residual < opts.newton_tolerance) {
            if (residual_out) *residual_out = residual;
            return it;
        }
        // d(rhs_j)/d(phi_j) = chi1 chi2 sum_i z_i^2 c_ij, moved onto the diagonal.
        BandedSystem jac = sys;
        for (std::size_t j = 0; j < phi.size(); ++j) {
            double screening = 0.0;
            for (std::size_t i = 0; i < params.n_species(); ++i)
                screening += params.z[i] * params.z[i] * c[i][j];
            jac.diag[j] -= params.chi1 * params.chi2 * screening;
        }
        jac.rhs = std::move(minus_r);
        const std::vector<double> delta = solve_banded(jac);
        double step = 0.0;
        for (double dv : delta) step = std::max(step, std::abs(dv));
        const double damping = step > opts.max_newton_step ? opts.max_newton_step / step : 1.0;
        for (std::size_t j = 0; j < phi.size(); ++j) phi[j] += damping * delta[j];
    }
    throw NumericalError("pb_steady_state: Newton iteration did not reach residual " +
                         std::to_string(opts.newton_tolerance) + " within " +
                         std::to_string(opts.max_newton_iterations) + " iterations");
}

}  // namespace detail

/// Solves the steady-state problem with the per-species totals pinned to
/// target_masses. Each amplitude A_i is found by bisection around the Newton
/// potential solve, sweeping the species until every total matches.
inline PBResult pb_steady_state(const DimensionlessParameters& params, const Grid& grid,
                                const SampledProfiles& prof, std::span<const double> target_masses,
                                const PBOptions& opts = {}) {
    params.validate();
    const std::size_t ns = params.n_species();
    if (target_masses.size() != ns)
        throw ConfigError("pb_steady_state: one target mass per species required");
    for (double m : target_masses)
        if (!(m > 0.0)) throw ConfigError("pb_steady_state: target masses must be positive");

    PBResult result;
    result.phi.assign(grid.n_nodes(), 0.0);
    result.coefficients.assign(ns, 0.0);
    for (std::size_t i = 0; i < ns; ++i) result.coefficients[i] = target_masses[i] / 2.0;

    auto mass_of = [&](std::size_t i) {
        std::vector<double> ci(grid.n_nodes());
        for (std::size_t j = 0; j < ci.size(); ++j)
            ci[j] = result.coefficients[i] *
                    std::exp(-params.chi1 * params.z[i] * result.phi[j]);
        return trapezoid(ci, grid);
    };
    auto solve_phi = [&]() {
        result.newton_iterations +=
            detail::pb_newton(result.phi, result.coefficients, params, grid, prof, opts,
                              &result.residual);
    };

    solve_phi();
    auto worst_mismatch = [&] {
        double worst = 0.0;
        for (std::size_t i = 0; i < ns; ++i)
            worst = std::max(worst, std::abs(mass_of(i) - target_masses[i]) / target_masses[i]);
        return worst;
    };
    // Outer sweeps: bisect each amplitude against the frozen potential (the
    // species total is strictly increasing in its amplitude there), then
    // refresh the potential once. Alternating the scalar solves with the
    // Newton solve contracts the coupled mismatch geometrically.
    for (int sweep = 0; sweep < opts.max_mass_sweeps; ++sweep) {
        if (worst_mismatch() <= opts.mass_tolerance) break;
        if (sweep + 1 == opts.max_mass_sweeps) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.3e", worst_mismatch());
            throw NumericalError("pb_steady_state: mass constraints not met after " +
                                 std::to_string(opts.max_mass_sweeps) +
                                 " sweeps (worst relative mismatch " + std::string(buf) + ")");
        }
        for (std::size_t i = 0; i < ns; ++i) {
            auto frozen_mismatch = [&](double a) {
                result.coefficients[i] = a;
                return mass_of(i) - target_masses[i];
            };
            double lo = result.coefficients[i], hi = result.coefficients[i];
            if (frozen_mismatch(lo) < 0.0) {
                while (frozen_mismatch(hi) < 0.0) hi *= 2.0;
            } else {
                while (frozen_mismatch(lo) > 0.0) lo *= 0.5;
            }
            for (int b = 0; b < 200 && hi - lo > 1e-15 * hi; ++b) {
                const double mid = 0.5 * (lo + hi);
                (frozen_mismatch(mid) < 0.0 ? lo : hi) = mid;
            }
        }
        solve_phi();
    }

    result.c = detail::boltzmann_concentrations(result.coefficients, result.phi, params);
    return result;
}

}  // namespace pnp
