#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pnp/errors.hpp"
#include "pnp/params.hpp"

namespace pnp {

/// Uniform mesh on [-1, 1] with J subintervals and nodes at both boundaries.
struct Grid {
    std::size_t intervals = 0;  ///< J
    double dx = 0.0;            ///< 2 / J
    std::vector<double> nodes;  ///< x_j for j = 0..J

    std::size_t n_nodes() const { return nodes.size(); }
};

/// Nodes are computed as (2j - J)/J so that mirrored node pairs are exact
/// negations of each other and the midpoint of an even grid is exactly zero.
inline Grid build_grid(std::size_t j_intervals) {
    if (j_intervals < 4)
        throw ConfigError("grid needs at least 4 subintervals, got " + std::to_string(j_intervals));
    Grid g;
    g.intervals = j_intervals;
    g.dx = 2.0 / static_cast<double>(j_intervals);
    g.nodes.resize(j_intervals + 1);
    for (std::size_t j = 0; j <= j_intervals; ++j) {
        g.nodes[j] = (2.0 * static_cast<double>(j) - static_cast<double>(j_intervals)) /
                     static_cast<double>(j_intervals);
    }
    return g;
}

/// Node values of every unknown at one instant.
struct FieldState {
    double t = 0.0;
    std::vector<std::vector<double>> c;  ///< per species, length J+1 each
    std::vector<double> phi;             ///< length J+1
};

/// Composite trapezoidal rule over the grid.
inline double trapezoid(std::span<const double> values, const Grid& grid) {
    if (values.size() != grid.n_nodes())
        throw ConfigError("trapezoid: array length " + std::to_string(values.size()) +
                          " does not match node count " + std::to_string(grid.n_nodes()));
    double interior = 0.0;
    for (std::size_t j = 1; j + 1 < values.size(); ++j) interior += values[j];
    return grid.dx * (interior + 0.5 * (values.front() + values.back()));
}

/// Uniform concentrations with a consistent potential. The potential comes from
/// the supplied Poisson solve so the first step starts from a consistent state.
template <class PoissonSolve>
FieldState uniform_initial_state(const Grid& grid, const DimensionlessParameters& params,
                                 PoissonSolve&& solve_phi) {
    params.validate();
    FieldState state;
    state.t = 0.0;
    state.c.reserve(params.n_species());
    for (std::size_t i = 0; i < params.n_species(); ++i)
        state.c.emplace_back(grid.n_nodes(), params.c_init[i]);
    state.phi = solve_phi(state.c);
    return state;
}

}  // namespace pnp
