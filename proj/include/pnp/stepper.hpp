#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "pnp/banded.hpp"
#include "pnp/diagnostics.hpp"
#include "pnp/errors.hpp"
#include "pnp/grid.hpp"
#include "pnp/params.hpp"
#include "pnp/spatial.hpp"

namespace pnp {

struct StepperConfig {
    double dt = 1e-4;
    double gamma = 2.0 - std::numbers::sqrt2;  ///< TR fraction of the step
    int inner_iterations = 2;                  ///< extra fixed-point sweeps per stage
    BoundaryScheme scheme = BoundaryScheme::Conservative;
    double t_end = 1.0;

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("stepper: dt must be positive");
        if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("stepper: gamma must lie in (0, 1)");
        if (inner_iterations < 0) throw ConfigError("stepper: innerIterations must be >= 0");
    }
};

inline std::vector<double> solve_poisson(const std::vector<std::vector<double>>& c,
                                         const DimensionlessParameters& params, const Grid& grid,
                                         const SampledProfiles& prof) {
    return solve_banded(assemble_poisson_system(c, params, grid, prof));
}

/// Output of one implicit stage: the final concentration/potential iterate plus
/// the max-norm change between consecutive concentration iterates (one entry
/// per inner iteration) and solve counters.
struct StageResult {
    std::vector<std::vector<double>> c;
    std::vector<double> phi;
    std::vector<double> iterate_deltas;
    int c_solves = 0;
    int poisson_solves = 0;
};

namespace detail {

inline double max_abs_difference(const std::vector<std::vector<double>>& a,
                                 const std::vector<std::vector<double>>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j)
            worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
    return worst;
}

/// Shared fixed-point loop of both stages. Each sweep solves the per-species
/// implicit systems against the frozen potential iterate, then refreshes the
/// potential from the new concentrations.
template <class SystemForSpecies>
StageResult iterate_stage(const std::vector<double>& phi_guess, int inner_iterations,
                          const DimensionlessParameters& params, const Grid& grid,
                          const SampledProfiles& prof, SystemForSpecies&& system_for) {
    StageResult r;
    r.phi = phi_guess;
    for (int k = 0; k <= inner_iterations; ++k) {
        std::vector<std::vector<double>> c_next(params.n_species());
        for (std::size_t i = 0; i < params.n_species(); ++i) {
            c_next[i] = solve_banded(system_for(i, r.phi));
            ++r.c_solves;
        }
        if (k > 0) r.iterate_deltas.push_back(max_abs_difference(c_next, r.c));
        r.c = std::move(c_next);
        r.phi = solve_poisson(r.c, params, grid, prof);
        ++r.poisson_solves;
    }
    return r;
}

}  // namespace detail

/// Trapezoidal stage to t + gamma dt. The explicit halves of the right-hand
/// sides are fixed at the time-n fields; the first potential iterate is phi^n.
inline StageResult tr_stage(const FieldState& state, const StepperConfig& cfg,
                            const DimensionlessParameters& params, const Grid& grid,
                            const SampledProfiles& prof) {
    const double w = 0.5 * cfg.gamma * cfg.dt;
    std::vector<std::vector<double>> rhs(params.n_species());
    for (std::size_t i = 0; i < params.n_species(); ++i) {
        const BandedSystem m = rate_matrix(i, state.phi, cfg.scheme, params, grid);
        rhs[i] = apply_banded(m, state.c[i]);
        for (std::size_t j = 0; j < rhs[i].size(); ++j) rhs[i][j] = state.c[i][j] + w * rhs[i][j];
    }
    return detail::iterate_stage(
        state.phi, cfg.inner_iterations, params, grid, prof,
        [&](std::size_t i, const std::vector<double>& phi) {
            return implicit_system(rate_matrix(i, phi, cfg.scheme, params, grid), w, rhs[i]);
        });
}

/// Backward-differentiation stage to t + dt, started from the stage potential.
inline StageResult bdf2_stage(const FieldState& state, const StageResult& tr,
                              const StepperConfig& cfg, const DimensionlessParameters& params,
                              const Grid& grid, const SampledProfiles& prof) {
    const double w = (1.0 - cfg.gamma) / (2.0 - cfg.gamma) * cfg.dt;
    const double a_stage = bdf2_weight_stage(cfg.gamma);
    const double a_old = bdf2_weight_old(cfg.gamma);
    std::vector<std::vector<double>> rhs(params.n_species());
    for (std::size_t i = 0; i < params.n_species(); ++i) {
        rhs[i].resize(grid.n_nodes());
        for (std::size_t j = 0; j < rhs[i].size(); ++j)
            rhs[i][j] = a_stage * tr.c[i][j] - a_old * state.c[i][j];
    }
    return detail::iterate_stage(
        tr.phi, cfg.inner_iterations, params, grid, prof,
        [&](std::size_t i, const std::vector<double>& phi) {
            return implicit_system(rate_matrix(i, phi, cfg.scheme, params, grid), w, rhs[i]);
        });
}

/// One full step of size cfg.dt.
inline FieldState advance(const FieldState& state, const StepperConfig& cfg,
                          const DimensionlessParameters& params, const Grid& grid,
                          const SampledProfiles& prof) {
    const StageResult tr = tr_stage(state, cfg, params, grid, prof);
    StageResult b = bdf2_stage(state, tr, cfg, params, grid, prof);
    FieldState next;
    next.t = state.t + cfg.dt;
    next.c = std::move(b.c);
    next.phi = std::move(b.phi);
    return next;
}

/// Uniform initial fields with the consistent potential.
inline FieldState initial_state(const DimensionlessParameters& params, const Grid& grid,
                                const SampledProfiles& prof) {
    return uniform_initial_state(grid, params, [&](const std::vector<std::vector<double>>& c) {
        return solve_poisson(c, params, grid, prof);
    });
}

/// Steps state to t_end without diagnostics; the last step is shortened to land
/// on t_end exactly. Used by the convergence studies.
inline void integrate_to(FieldState& state, const StepperConfig& cfg,
                         const DimensionlessParameters& params, const Grid& grid,
                         const SampledProfiles& prof) {
    cfg.validate();
    const double t0 = state.t;
    const double t_end = cfg.t_end;
    const double tol = 1e-9 * cfg.dt;  // residual gaps below this are round-off, not steps
    std::size_t step = 0;
    while (state.t < t_end - tol) {
        StepperConfig step_cfg = cfg;
        const double planned = t0 + static_cast<double>(step + 1) * cfg.dt;
        const bool last = planned >= t_end - tol;
        if (last) step_cfg.dt = t_end - state.t;
        state = advance(state, step_cfg, params, grid, prof);
        ++step;
        state.t = last ? t_end : planned;  // avoids accumulating round-off in t
    }
}

struct RunObservers {
    std::vector<double> snapshot_times;  ///< must be sorted ascending
    std::size_t sample_every = 1;        ///< diagnostics cadence in steps
    std::function<void(const FieldState&)> snapshot_sink;
    double steady_threshold = 0.0;  ///< stop once max |dc/dt| drops below; 0 disables
};

/// Advances to cfg.t_end, sampling diagnostics on the configured cadence and
/// emitting each snapshot at the first step time reaching its target. Aborts
/// with the last good time when the state stops being finite.
inline DiagnosticsRecord run(FieldState& state, const StepperConfig& cfg,
                             const DimensionlessParameters& params, const Grid& grid,
                             const SampledProfiles& prof, const RunObservers& observers = {}) {
    cfg.validate();
    params.validate();
    if (cfg.t_end < state.t)
        throw ConfigError("run: tEnd is earlier than the initial time");
    if (observers.sample_every == 0) throw ConfigError("run: sampleEvery must be positive");

    DiagnosticsRecord record;
    record.info.under_resolved = grid.dx > 0.05;

    std::size_t next_snapshot = 0;
    auto emit_snapshots = [&](const FieldState& s) {
        const double tol = 1e-12 * std::max(1.0, std::abs(s.t));
        while (next_snapshot < observers.snapshot_times.size() &&
               observers.snapshot_times[next_snapshot] <= s.t + tol) {
            if (observers.snapshot_sink) observers.snapshot_sink(s);
            ++next_snapshot;
        }
    };
    auto take_sample = [&](const FieldState& s) {
        record.samples.push_back(sample_diagnostics(s, params, grid, prof));
        if (!record.samples.back().energy_valid) ++record.info.invalid_samples;
    };

    take_sample(state);
    emit_snapshots(state);

    const double t0 = state.t;
    const double t_end = cfg.t_end;
    const double tol = 1e-9 * cfg.dt;  // residual gaps below this are round-off, not steps
    std::size_t step = 0;
    while (state.t < t_end - tol) {
        const double t_before = state.t;
        StepperConfig step_cfg = cfg;
        const double planned = t0 + static_cast<double>(step + 1) * cfg.dt;
        const bool last = planned >= t_end - tol;
        if (last) step_cfg.dt = t_end - state.t;
        state = advance(state, step_cfg, params, grid, prof);
        state.t = last ? t_end : planned;  // avoids accumulating round-off in t
        ++step;

        for (const auto& ci : state.c)
            for (double v : ci)
                if (!std::isfinite(v))
                    throw NumericalError("run: non-finite concentration after step " +
                                         std::to_string(step) + "; last good time t=" +
                                         std::to_string(t_before));
        for (double v : state.phi)
            if (!std::isfinite(v))
                throw NumericalError("run: non-finite potential after step " + std::to_string(step) +
                                     "; last good time t=" + std::to_string(t_before));

        double most_negative = 0.0;
        for (const auto& ci : state.c)
            for (double v : ci) most_negative = std::min(most_negative, v);
        if (most_negative < 0.0) {
            ++record.info.negative_concentration_steps;
            record.info.most_negative_concentration =
                std::min(record.info.most_negative_concentration, most_negative);
        }

        const bool final_step = !(state.t < t_end - tol);
        if (step % observers.sample_every == 0 || final_step) {
            take_sample(state);
            if (observers.steady_threshold > 0.0 &&
                record.samples.back().max_rate < observers.steady_threshold) {
                record.info.stopped_at_steady_state = true;
                emit_snapshots(state);
                break;
            }
        }
        emit_snapshots(state);
    }
    record.info.steps = step;
    return record;
}

}  // namespace pnp
