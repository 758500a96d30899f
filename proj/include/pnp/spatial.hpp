#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pnp/banded.hpp"
#include "pnp/errors.hpp"
#include "pnp/grid.hpp"
#include "pnp/params.hpp"

namespace pnp {

/// How the no-flux boundary rows of the transport equation are discretized.
/// Standard: forward differencing of the flux divergence at the wall.
/// Conservative: one-sided rows chosen so the trapezoidal total of each species
/// is constant in time as an algebraic identity.
enum class BoundaryScheme { Standard, Conservative };

inline const char* to_string(BoundaryScheme s) {
    return s == BoundaryScheme::Standard ? "standard" : "conservative";
}

/// Potential at the ghost nodes x_{-1} and x_{J+1}, from closing the Robin
/// condition with a central difference across each boundary.
struct GhostPotentials {
    double left = 0.0;   ///< phi at x_{-1}
    double right = 0.0;  ///< phi at x_{J+1}
};

inline GhostPotentials ghost_potentials(std::span<const double> phi,
                                        const DimensionlessParameters& params, const Grid& grid) {
    if (!(params.eta_prime > 0.0))
        throw ConfigError("ghost_potentials: etaPrime must be positive (the Dirichlet limit is unsupported)");
    if (phi.size() != grid.n_nodes())
        throw ConfigError("ghost_potentials: potential length does not match the grid");
    const std::size_t J = grid.intervals;
    const double r = 2.0 * grid.dx / params.eta_prime;
    return {phi[1] - r * (phi[0] - params.phi_minus), phi[J - 1] - r * (phi[J] - params.phi_plus)};
}

/// Permittivity and fixed-charge profiles evaluated where the stencils need
/// them. eps_half[k] holds the value at x_{k-1/2} for k = 0..J+1; the two
/// midpoints outside the domain are clamped to the boundary.
struct SampledProfiles {
    std::vector<double> eps_half;
    std::vector<double> eps_node;
    std::vector<double> rho0_node;

    static SampledProfiles from_params(const DimensionlessParameters& params, const Grid& grid) {
        const std::size_t J = grid.intervals;
        SampledProfiles p;
        p.eps_half.resize(J + 2);
        p.eps_node.resize(J + 1);
        p.rho0_node.resize(J + 1);
        p.eps_half[0] = params.eps_at(-1.0);
        p.eps_half[J + 1] = params.eps_at(1.0);
        for (std::size_t k = 1; k <= J; ++k)
            p.eps_half[k] = params.eps_at(0.5 * (grid.nodes[k - 1] + grid.nodes[k]));
        for (std::size_t j = 0; j <= J; ++j) {
            p.eps_node[j] = params.eps_at(grid.nodes[j]);
            p.rho0_node[j] = params.rho0_at(grid.nodes[j]);
        }
        p.check();
        return p;
    }

    /// Midpoint values as arithmetic means of adjacent node samples.
    static SampledProfiles from_node_samples(std::span<const double> eps_nodes,
                                             std::span<const double> rho0_nodes, const Grid& grid) {
        const std::size_t J = grid.intervals;
        if (eps_nodes.size() != J + 1 || rho0_nodes.size() != J + 1)
            throw ConfigError("SampledProfiles: node sample length does not match the grid");
        SampledProfiles p;
        p.eps_node.assign(eps_nodes.begin(), eps_nodes.end());
        p.rho0_node.assign(rho0_nodes.begin(), rho0_nodes.end());
        p.eps_half.resize(J + 2);
        p.eps_half[0] = eps_nodes[0];
        p.eps_half[J + 1] = eps_nodes[J];
        for (std::size_t k = 1; k <= J; ++k)
            p.eps_half[k] = 0.5 * (eps_nodes[k - 1] + eps_nodes[k]);
        p.check();
        return p;
    }

    void check() const {
        for (double e : eps_half)
            if (!(e > 0.0)) throw ConfigError("permittivity profile must be positive everywhere");
    }
};

/// Spatial transport operator for species i as a matrix in the concentrations,
/// for a frozen potential. Interior rows combine the central diffusion stencil
/// with the wide drift stencil
///   chi1 z [D c_{j+1}(phi_{j+2}-phi_j) - D c_{j-1}(phi_j-phi_{j-2})] / (4 dx²),
/// which reaches the ghost potentials at j = 1 and j = J-1. Boundary rows depend
/// on the scheme; only rows 0 and J differ between the two schemes.
inline BandedSystem rate_matrix(std::size_t species, std::span<const double> phi,
                                BoundaryScheme scheme, const DimensionlessParameters& params,
                                const Grid& grid) {
    const std::size_t J = grid.intervals;
    if (phi.size() != J + 1) throw ConfigError("rate_matrix: potential length does not match the grid");
    if (species >= params.n_species()) throw ConfigError("rate_matrix: species index out of range");

    const double dx2 = grid.dx * grid.dx;
    const double diff = params.d_prime[species];
    const double drift = params.chi1 * params.z[species] * diff;
    const GhostPotentials ghost = ghost_potentials(phi, params, grid);

    BandedSystem m = BandedSystem::zeros(J + 1, scheme == BoundaryScheme::Standard);
    m.rhs.clear();

    for (std::size_t j = 1; j < J; ++j) {
        const double phi_m2 = (j == 1) ? ghost.left : phi[j - 2];
        const double phi_p2 = (j == J - 1) ? ghost.right : phi[j + 2];
        m.sub[j] = diff / dx2 - drift * (phi[j] - phi_m2) / (4.0 * dx2);
        m.diag[j] = -2.0 * diff / dx2;
        m.super[j] = diff / dx2 + drift * (phi_p2 - phi[j]) / (4.0 * dx2);
    }

    if (scheme == BoundaryScheme::Conservative) {
        // One-sided rows over a half cell: [flux(x_{1/2}) - 0] / (dx/2), with the
        // half-cell flux built from the same central differences as the interior.
        m.diag[0] = -2.0 * diff / dx2 + drift * (phi[1] - ghost.left) / (2.0 * dx2);
        m.super[0] = 2.0 * diff / dx2 + drift * (phi[2] - phi[0]) / (2.0 * dx2);
        m.sub[J] = 2.0 * diff / dx2 - drift * (phi[J] - phi[J - 2]) / (2.0 * dx2);
        m.diag[J] = -2.0 * diff / dx2 - drift * (ghost.right - phi[J - 1]) / (2.0 * dx2);
    } else {
        // Forward differencing of the flux divergence against the no-flux value,
        // coupling the wall to the two nearest interior nodes.
        m.diag[0] = -diff / (2.0 * dx2);
        m.super[0] = drift * (phi[2] - phi[0]) / (2.0 * dx2);
        m.corner_first = diff / (2.0 * dx2);
        m.diag[J] = -diff / (2.0 * dx2);
        m.sub[J] = -drift * (phi[J] - phi[J - 2]) / (2.0 * dx2);
        m.corner_last = diff / (2.0 * dx2);
    }
    return m;
}

/// Interior values of the transport operator applied to c, j = 1..J-1.
inline std::vector<double> np_rhs(std::span<const double> c, std::span<const double> phi,
                                  std::size_t species, const DimensionlessParameters& params,
                                  const Grid& grid) {
    const std::size_t J = grid.intervals;
    if (c.size() != J + 1 || phi.size() != J + 1)
        throw ConfigError("np_rhs: array length does not match the grid");
    const double dx2 = grid.dx * grid.dx;
    const double diff = params.d_prime[species];
    const double drift = params.chi1 * params.z[species] * diff;
    const GhostPotentials ghost = ghost_potentials(phi, params, grid);

    std::vector<double> f(J - 1);
    for (std::size_t j = 1; j < J; ++j) {
        const double phi_m2 = (j == 1) ? ghost.left : phi[j - 2];
        const double phi_p2 = (j == J - 1) ? ghost.right : phi[j + 2];
        f[j - 1] = diff * (c[j + 1] - 2.0 * c[j] + c[j - 1]) / dx2 +
                   drift * (c[j + 1] * (phi_p2 - phi[j]) - c[j - 1] * (phi[j] - phi_m2)) / (4.0 * dx2);
    }
    return f;
}

/// Discrete Poisson problem: variable-coefficient Laplacian rows equal to
/// -(rho0' + chi2 sum_i z_i c_i) at every node, with the ghost potential
/// eliminated through the Robin closure in rows 0 and J. Strictly tridiagonal.
inline BandedSystem assemble_poisson_system(const std::vector<std::vector<double>>& c,
                                            const DimensionlessParameters& params, const Grid& grid,
                                            const SampledProfiles& prof) {
    const std::size_t J = grid.intervals;
    if (c.size() != params.n_species())
        throw ConfigError("assemble_poisson_system: species count mismatch");
    for (const auto& ci : c)
        if (ci.size() != J + 1)
            throw ConfigError("assemble_poisson_system: concentration length does not match the grid");
    if (!(params.eta_prime > 0.0))
        throw ConfigError("assemble_poisson_system: etaPrime must be positive");

    const double dx = grid.dx;
    const double dx2 = dx * dx;

    std::vector<double> charge(J + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j <= J; ++j) charge[j] += params.z[i] * c[i][j];

    BandedSystem sys = BandedSystem::zeros(J + 1, false);
    for (std::size_t j = 1; j < J; ++j) {
        const double el = prof.eps_half[j];      // eps at x_{j-1/2}
        const double er = prof.eps_half[j + 1];  // eps at x_{j+1/2}
        sys.sub[j] = el / dx2;
        sys.diag[j] = -(el + er) / dx2;
        sys.super[j] = er / dx2;
        sys.rhs[j] = -(prof.rho0_node[j] + params.chi2 * charge[j]);
    }
    const double robin = 2.0 * dx / params.eta_prime;
    {
        const double e_out = prof.eps_half[0];
        const double e_in = prof.eps_half[1];
        sys.diag[0] = -((e_in + e_out) + robin * e_out) / dx2;
        sys.super[0] = (e_in + e_out) / dx2;
        sys.rhs[0] = -(prof.rho0_node[0] + params.chi2 * charge[0]) -
                     robin * e_out * params.phi_minus / dx2;
    }
    {
        const double e_out = prof.eps_half[J + 1];
        const double e_in = prof.eps_half[J];
        sys.diag[J] = -((e_in + e_out) + robin * e_out) / dx2;
        sys.sub[J] = (e_in + e_out) / dx2;
        sys.rhs[J] = -(prof.rho0_node[J] + params.chi2 * charge[J]) -
                     robin * e_out * params.phi_plus / dx2;
    }
    return sys;
}

/// (I - w M) x = rhs
inline BandedSystem implicit_system(const BandedSystem& m, double w, std::span<const double> rhs) {
    const std::size_t n = m.size();
    if (rhs.size() != n) throw ConfigError("implicit_system: rhs length does not match the operator");
    BandedSystem sys = BandedSystem::zeros(n, m.has_corners);
    for (std::size_t j = 0; j < n; ++j) {
        sys.sub[j] = -w * m.sub[j];
        sys.diag[j] = 1.0 - w * m.diag[j];
        sys.super[j] = -w * m.super[j];
        sys.rhs[j] = rhs[j];
    }
    if (m.has_corners) {
        sys.corner_first = -w * m.corner_first;
        sys.corner_last = -w * m.corner_last;
    }
    return sys;
}

/// Trapezoidal stage system for one species. The implicit half is evaluated at
/// the current potential iterate, the explicit half at the time-n potential;
/// the solution is the next concentration iterate.
inline BandedSystem assemble_tr_system(std::size_t species, std::span<const double> c_n,
                                       std::span<const double> phi_iterate,
                                       std::span<const double> phi_n, BoundaryScheme scheme,
                                       double gamma_dt, const DimensionlessParameters& params,
                                       const Grid& grid) {
    if (c_n.size() != grid.n_nodes())
        throw ConfigError("assemble_tr_system: concentration length does not match the grid");
    const double w = 0.5 * gamma_dt;
    const BandedSystem m_explicit = rate_matrix(species, phi_n, scheme, params, grid);
    std::vector<double> rhs = apply_banded(m_explicit, c_n);
    for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] = c_n[j] + w * rhs[j];
    return implicit_system(rate_matrix(species, phi_iterate, scheme, params, grid), w, rhs);
}

inline double bdf2_weight_stage(double gamma) { return 1.0 / (gamma * (2.0 - gamma)); }
inline double bdf2_weight_old(double gamma) {
    return (1.0 - gamma) * (1.0 - gamma) / (gamma * (2.0 - gamma));
}

/// Backward-differentiation stage system for one species. The right-hand side
/// is the fixed linear combination of the stage and time-n concentrations; the
/// only potential involved is the current iterate.
inline BandedSystem assemble_bdf2_system(std::size_t species, std::span<const double> c_n,
                                         std::span<const double> c_stage,
                                         std::span<const double> phi_iterate, BoundaryScheme scheme,
                                         double dt, double gamma,
                                         const DimensionlessParameters& params, const Grid& grid) {
    if (c_n.size() != grid.n_nodes() || c_stage.size() != grid.n_nodes())
        throw ConfigError("assemble_bdf2_system: concentration length does not match the grid");
    const double w = (1.0 - gamma) / (2.0 - gamma) * dt;
    const double a_stage = bdf2_weight_stage(gamma);
    const double a_old = bdf2_weight_old(gamma);
    std::vector<double> rhs(c_n.size());
    for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] = a_stage * c_stage[j] - a_old * c_n[j];
    return implicit_system(rate_matrix(species, phi_iterate, scheme, params, grid), w, rhs);
}

}  // namespace pnp
