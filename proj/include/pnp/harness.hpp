#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pnp/diagnostics.hpp"
#include "pnp/errors.hpp"
#include "pnp/grid.hpp"
#include "pnp/params.hpp"
#include "pnp/pb.hpp"
#include "pnp/stepper.hpp"

namespace pnp {

/// Observed convergence order from values at resolutions h, 2h and 4h:
/// log2(|v2 - v3| / |v1 - v2|). Differences at round-off level make the
/// estimate meaningless and are rejected.
inline double richardson_order(double v1, double v2, double v3) {
    const double eps = std::numeric_limits<double>::epsilon();
    const double floor = 1e2 * eps * std::abs(v1);
    if (std::abs(v1 - v2) <= floor || std::abs(v2 - v3) <= floor)
        throw NumericalError("richardson_order: differences are at round-off level, "
                             "order estimate is inconclusive");
    return std::log2(std::abs(v2 - v3) / std::abs(v1 - v2));
}

struct ProbePoint {
    double x = 0.904;
    double t = 0.02;
};

/// Node index of x on the grid; the probe must sit on a node so no
/// interpolation error enters the order estimates.
inline std::size_t probe_node(const Grid& grid, double x) {
    const double pos = (x + 1.0) / grid.dx;
    const auto j = static_cast<std::size_t>(std::llround(pos));
    if (j >= grid.n_nodes() || std::abs(grid.nodes[j] - x) > 1e-12)
        throw ConfigError("probe x=" + std::to_string(x) + " does not lie on the grid (dx=" +
                          std::to_string(grid.dx) + ")");
    return j;
}

/// Potential at the probe after integrating a fresh uniform start to probe.t.
inline double probe_potential(const DimensionlessParameters& params, std::size_t intervals,
                              StepperConfig cfg, const ProbePoint& probe) {
    const Grid grid = build_grid(intervals);
    const std::size_t node = probe_node(grid, probe.x);
    const SampledProfiles prof = SampledProfiles::from_params(params, grid);
    FieldState state = initial_state(params, grid, prof);
    cfg.t_end = probe.t;
    integrate_to(state, cfg, params, grid, prof);
    return state.phi[node];
}

struct OrderEstimate {
    double base_step = 0.0;  ///< finest dt (or dx) of the triple
    double order = 0.0;
    double value = 0.0;  ///< probe value at the finest resolution
};

/// Order of convergence in time at the probe: one estimate per base step, each
/// from runs at dt, 2dt and 4dt on a fixed grid.
inline std::vector<OrderEstimate> temporal_order_study(const DimensionlessParameters& params,
                                                       std::size_t intervals, BoundaryScheme scheme,
                                                       int inner_iterations, const ProbePoint& probe,
                                                       std::span<const double> base_dts) {
    std::map<double, double> value_at_dt;
    auto value = [&](double dt) {
        auto found = value_at_dt.find(dt);
        if (found != value_at_dt.end()) return found->second;
        StepperConfig cfg;
        cfg.dt = dt;
        cfg.scheme = scheme;
        cfg.inner_iterations = inner_iterations;
        const double v = probe_potential(params, intervals, cfg, probe);
        value_at_dt.emplace(dt, v);
        return v;
    };
    std::vector<OrderEstimate> estimates;
    for (double dt : base_dts) {
        OrderEstimate e;
        e.base_step = dt;
        e.value = value(dt);
        e.order = richardson_order(e.value, value(2.0 * dt), value(4.0 * dt));
        estimates.push_back(e);
    }
    return estimates;
}

/// Order of convergence in space at the probe, from grids at dx, 2dx and 4dx
/// with a time step small enough that the spatial error dominates.
inline OrderEstimate spatial_order_study(const DimensionlessParameters& params,
                                         std::size_t finest_intervals, BoundaryScheme scheme,
                                         int inner_iterations, const ProbePoint& probe, double dt) {
    if (finest_intervals % 4 != 0)
        throw ConfigError("spatial order study needs the interval count divisible by 4");
    StepperConfig cfg;
    cfg.dt = dt;
    cfg.scheme = scheme;
    cfg.inner_iterations = inner_iterations;
    OrderEstimate e;
    e.base_step = 2.0 / static_cast<double>(finest_intervals);
    e.value = probe_potential(params, finest_intervals, cfg, probe);
    const double v2 = probe_potential(params, finest_intervals / 2, cfg, probe);
    const double v3 = probe_potential(params, finest_intervals / 4, cfg, probe);
    e.order = richardson_order(e.value, v2, v3);
    return e;
}

struct SimulationOutput {
    DiagnosticsRecord record;
    std::vector<FieldState> snapshots;
    FieldState final_state;
};

/// One full run with diagnostics and captured snapshots.
inline SimulationOutput run_simulation(const DimensionlessParameters& params, std::size_t intervals,
                                       const StepperConfig& cfg,
                                       std::vector<double> snapshot_times = {},
                                       std::size_t sample_every = 1, double steady_threshold = 0.0) {
    const Grid grid = build_grid(intervals);
    const SampledProfiles prof = SampledProfiles::from_params(params, grid);
    SimulationOutput out;
    FieldState state = initial_state(params, grid, prof);
    RunObservers observers;
    observers.snapshot_times = std::move(snapshot_times);
    observers.sample_every = sample_every;
    observers.steady_threshold = steady_threshold;
    observers.snapshot_sink = [&out](const FieldState& s) { out.snapshots.push_back(s); };
    out.record = run(state, cfg, params, grid, prof, observers);
    out.final_state = std::move(state);
    return out;
}

struct SchemeComparison {
    SimulationOutput conservative;
    SimulationOutput standard;
};

/// Identical runs differing only in the boundary scheme.
inline SchemeComparison compare_schemes(const DimensionlessParameters& params,
                                        std::size_t intervals, StepperConfig cfg,
                                        std::vector<double> snapshot_times = {},
                                        std::size_t sample_every = 1) {
    SchemeComparison cmp;
    cfg.scheme = BoundaryScheme::Conservative;
    cmp.conservative = run_simulation(params, intervals, cfg, snapshot_times, sample_every);
    cfg.scheme = BoundaryScheme::Standard;
    cmp.standard = run_simulation(params, intervals, cfg, snapshot_times, sample_every);
    return cmp;
}

/// Relative L2 mismatch between the finite-difference dE/dt of the sampled
/// energy series and the sampled dissipation rate, over [t_lo, t_hi].
inline double dissipation_mismatch(const DiagnosticsRecord& record, double t_lo, double t_hi) {
    std::vector<double> t, e, rhs;
    for (const auto& s : record.samples) {
        if (!s.energy_valid || !s.dissipation_valid)
            throw NumericalError("dissipation_mismatch: invalid sample at t=" + std::to_string(s.t));
        t.push_back(s.t);
        e.push_back(s.energy);
        rhs.push_back(s.dissipation_rhs);
    }
    const std::vector<double> lhs = energy_rate_lhs(t, e);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < t_lo || t[k] > t_hi) continue;
        num += (lhs[k] - rhs[k]) * (lhs[k] - rhs[k]);
        den += rhs[k] * rhs[k];
    }
    if (den == 0.0) throw NumericalError("dissipation_mismatch: empty or zero window");
    return std::sqrt(num / den);
}

/// Distance from x = -1 to the first node where |phi - phi(0)| has fallen
/// below `threshold` times its boundary value.
inline double boundary_layer_width(std::span<const double> phi, const Grid& grid,
                                   double threshold = 0.05) {
    if (phi.size() != grid.n_nodes())
        throw ConfigError("boundary_layer_width: potential length does not match the grid");
    const double center = phi[grid.intervals / 2];
    const double boundary_excess = std::abs(phi[0] - center);
    if (boundary_excess == 0.0) return 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j)
        if (std::abs(phi[j] - center) < threshold * boundary_excess) return grid.nodes[j] + 1.0;
    return 2.0;
}

struct SweepPoint {
    double value = 0.0;
    double layer_width = 0.0;
    SimulationOutput output;
};

/// Runs the conservative scheme across chi2 values, reporting the final
/// boundary-layer width of each run.
inline std::vector<SweepPoint> chi2_sweep(DimensionlessParameters params, std::size_t intervals,
                                          StepperConfig cfg, std::span<const double> values,
                                          std::size_t sample_every = 10,
                                          double steady_threshold = 1e-6) {
    cfg.scheme = BoundaryScheme::Conservative;
    const Grid grid = build_grid(intervals);
    std::vector<SweepPoint> points;
    for (double v : values) {
        params.chi2 = v;
        SweepPoint p;
        p.value = v;
        p.output = run_simulation(params, intervals, cfg, {}, sample_every, steady_threshold);
        p.layer_width = boundary_layer_width(p.output.final_state.phi, grid);
        points.push_back(std::move(p));
    }
    return points;
}

/// Runs the conservative scheme across Robin lengths.
inline std::vector<SweepPoint> eta_sweep(DimensionlessParameters params, std::size_t intervals,
                                         StepperConfig cfg, std::span<const double> values,
                                         std::size_t sample_every = 10,
                                         double steady_threshold = 1e-6) {
    cfg.scheme = BoundaryScheme::Conservative;
    const Grid grid = build_grid(intervals);
    std::vector<SweepPoint> points;
    for (double v : values) {
        params.eta_prime = v;
        SweepPoint p;
        p.value = v;
        p.output = run_simulation(params, intervals, cfg, {}, sample_every, steady_threshold);
        p.layer_width = boundary_layer_width(p.output.final_state.phi, grid);
        points.push_back(std::move(p));
    }
    return points;
}

/// Largest relative concentration difference between two states on one grid.
inline double max_relative_concentration_difference(const FieldState& a, const FieldState& b) {
    if (a.c.size() != b.c.size()) throw ConfigError("states have different species counts");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.c.size(); ++i) {
        if (a.c[i].size() != b.c[i].size()) throw ConfigError("states live on different grids");
        for (std::size_t j = 0; j < a.c[i].size(); ++j) {
            const double denom = std::max(std::abs(b.c[i][j]), 1e-300);
            worst = std::max(worst, std::abs(a.c[i][j] - b.c[i][j]) / denom);
        }
    }
    return worst;
}

struct PBValidation {
    double max_phi_difference = 0.0;
    FieldState pnp_state;
    PBResult pb;
    bool stopped_at_steady_state = false;
};

/// Long-time transient solution against the steady-state solver, with
/// per-species masses pinned to the values the dynamics conserves.
inline PBValidation pb_validate(const DimensionlessParameters& params, std::size_t intervals,
                                StepperConfig cfg, const PBOptions& pb_opts = {}) {
    const Grid grid = build_grid(intervals);
    const SampledProfiles prof = SampledProfiles::from_params(params, grid);
    cfg.scheme = BoundaryScheme::Conservative;

    PBValidation v;
    FieldState state = initial_state(params, grid, prof);
    std::vector<double> masses(params.n_species());
    for (std::size_t i = 0; i < params.n_species(); ++i) masses[i] = trapezoid(state.c[i], grid);

    integrate_to(state, cfg, params, grid, prof);
    v.pnp_state = std::move(state);
    v.pb = pb_steady_state(params, grid, prof, masses, pb_opts);
    for (std::size_t j = 0; j < grid.n_nodes(); ++j)
        v.max_phi_difference =
            std::max(v.max_phi_difference, std::abs(v.pnp_state.phi[j] - v.pb.phi[j]));
    return v;
}

}  // namespace pnp
