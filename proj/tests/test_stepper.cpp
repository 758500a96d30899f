#include <cmath>
#include <numbers>

#include <catch2/catch_amalgamated.hpp>

#include "pnp/stepper.hpp"
#include "test_support.hpp"

using namespace pnp;
using Catch::Approx;

namespace {

struct Problem {
    DimensionlessParameters params;
    Grid grid;
    SampledProfiles prof;
    Problem(DimensionlessParameters p, std::size_t intervals)
        : params(std::move(p)),
          grid(build_grid(intervals)),
          prof(SampledProfiles::from_params(params, grid)) {}
};

FieldState equilibrium_state(const Problem& pb, double level) {
    FieldState s;
    s.t = 0.0;
    s.c.assign(pb.params.n_species(), std::vector<double>(pb.grid.n_nodes(), level));
    s.phi = solve_poisson(s.c, pb.params, pb.grid, pb.prof);
    return s;
}

}  // namespace

TEST_CASE("decoupled Poisson problems ignore the concentrations") {
    DimensionlessParameters p = testing::channel_baseline();
    p.chi2 = 0.0;  // manufactured decoupling, below the validated range on purpose
    const Problem pb(p, 16);
    std::mt19937 rng(5);
    const std::vector<std::vector<double>> uniform(2, std::vector<double>(17, 1.0));
    std::vector<std::vector<double>> random{testing::random_vector(rng, 17, 0.0, 3.0),
                                            testing::random_vector(rng, 17, 0.0, 3.0)};
    const auto a = solve_poisson(uniform, p, pb.grid, pb.prof);
    const auto b = solve_poisson(random, p, pb.grid, pb.prof);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == Approx(b[j]).margin(1e-14));
}

TEST_CASE("mirrored charge produces an odd potential") {
    DimensionlessParameters p = testing::channel_baseline();
    const Problem pb(p, 64);
    std::mt19937 rng(17);
    const std::size_t n = pb.grid.n_nodes();
    auto g = testing::random_vector(rng, n, 0.2, 1.8);
    std::vector<std::vector<double>> c(2, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        c[0][j] = g[j];
        c[1][j] = g[n - 1 - j];  // species 2 is the mirror of species 1
    }
    const auto phi = solve_poisson(c, p, pb.grid, pb.prof);
    for (std::size_t j = 0; j < n; ++j) CHECK(phi[j] == Approx(-phi[n - 1 - j]).margin(1e-12));
}

TEST_CASE("both stages hold an equilibrium fixed") {
    DimensionlessParameters p = testing::channel_baseline();
    p.phi_minus = p.phi_plus = 0.0;
    const Problem pb(p, 32);
    const FieldState s = equilibrium_state(pb, 1.0);
    StepperConfig cfg;
    cfg.dt = 1e-3;

    for (auto scheme : {BoundaryScheme::Conservative, BoundaryScheme::Standard}) {
        cfg.scheme = scheme;
        const StageResult tr = tr_stage(s, cfg, p, pb.grid, pb.prof);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < tr.c[i].size(); ++j)
                CHECK(tr.c[i][j] == Approx(1.0).margin(1e-13));
        const StageResult b = bdf2_stage(s, tr, cfg, p, pb.grid, pb.prof);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < b.c[i].size(); ++j)
                CHECK(b.c[i][j] == Approx(1.0).margin(1e-13));
        FieldState next = s;
        for (int step = 0; step < 10; ++step) next = advance(next, cfg, p, pb.grid, pb.prof);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < next.c[i].size(); ++j)
                CHECK(next.c[i][j] == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("inner iteration counts map to solve counts") {
    const DimensionlessParameters p = testing::channel_baseline();
    const Problem pb(p, 64);
    const FieldState s = initial_state(p, pb.grid, pb.prof);
    StepperConfig cfg;
    cfg.dt = 1e-4;

    cfg.inner_iterations = 0;
    StageResult semi = tr_stage(s, cfg, p, pb.grid, pb.prof);
    CHECK(semi.c_solves == 2);  // one per species
    CHECK(semi.poisson_solves == 1);
    CHECK(semi.iterate_deltas.empty());

    cfg.inner_iterations = 2;
    StageResult full = tr_stage(s, cfg, p, pb.grid, pb.prof);
    CHECK(full.c_solves == 6);
    CHECK(full.poisson_solves == 3);
    CHECK(full.iterate_deltas.size() == 2);

    double diff = 0.0;
    for (std::size_t j = 0; j < full.c[0].size(); ++j)
        diff = std::max(diff, std::abs(full.c[0][j] - semi.c[0][j]));
    CHECK(diff > 0.0);
}

TEST_CASE("inner iterations contract on the channel baseline") {
    const DimensionlessParameters p = testing::channel_baseline();
    const Problem pb(p, 1000);
    const FieldState s = initial_state(p, pb.grid, pb.prof);
    StepperConfig cfg;
    cfg.dt = 1e-4;
    cfg.inner_iterations = 2;
    const StageResult tr = tr_stage(s, cfg, p, pb.grid, pb.prof);
    REQUIRE(tr.iterate_deltas.size() == 2);
    INFO("iterate deltas: " << tr.iterate_deltas[0] << " -> " << tr.iterate_deltas[1]);
    CHECK(tr.iterate_deltas[1] < tr.iterate_deltas[0]);
}

TEST_CASE("short symmetric runs stay symmetric and conservative") {
    const DimensionlessParameters p = testing::channel_baseline();
    const Problem pb(p, 200);
    FieldState s = initial_state(p, pb.grid, pb.prof);
    StepperConfig cfg;
    cfg.dt = 1e-4;
    const std::vector<double> total0{trapezoid(s.c[0], pb.grid), trapezoid(s.c[1], pb.grid)};

    for (int step = 0; step < 100; ++step) s = advance(s, cfg, p, pb.grid, pb.prof);

    const std::size_t n = pb.grid.n_nodes();
    for (std::size_t j = 0; j < n; ++j) {
        CHECK(s.c[0][j] == Approx(s.c[1][n - 1 - j]).margin(1e-10));
        CHECK(s.phi[j] == Approx(-s.phi[n - 1 - j]).margin(1e-10));
    }
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(trapezoid(s.c[i], pb.grid) == Approx(total0[i]).epsilon(1e-12));
}

TEST_CASE("run with tEnd at the initial time yields a single sample") {
    const DimensionlessParameters p = testing::channel_baseline();
    const Problem pb(p, 16);
    FieldState s = initial_state(p, pb.grid, pb.prof);
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.0;
    const DiagnosticsRecord record = run(s, cfg, p, pb.grid, pb.prof);
    CHECK(record.samples.size() == 1);
    CHECK(record.info.steps == 0);
    CHECK(record.samples[0].t == 0.0);
}

TEST_CASE("snapshots fire at the first step reaching each target") {
    const DimensionlessParameters p = testing::channel_baseline();
    const Problem pb(p, 50);
    FieldState s = initial_state(p, pb.grid, pb.prof);
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.05;

    std::vector<double> seen;
    RunObservers obs;
    obs.snapshot_times = {0.0, 0.01, 0.05};
    obs.sample_every = 10;
    obs.snapshot_sink = [&seen](const FieldState& state) { seen.push_back(state.t); };
    run(s, cfg, p, pb.grid, pb.prof, obs);
    REQUIRE(seen.size() == 3);
    CHECK(seen[0] == 0.0);
    CHECK(seen[1] == Approx(0.01).margin(1e-12));
    CHECK(seen[2] == Approx(0.05).margin(1e-12));
}

TEST_CASE("sampling cadence is uniform and lands on the final time") {
    const DimensionlessParameters p = testing::channel_baseline();
    const Problem pb(p, 50);
    FieldState s = initial_state(p, pb.grid, pb.prof);
    StepperConfig cfg;
    cfg.dt = 1e-4;
    cfg.t_end = 0.01;
    RunObservers obs;
    obs.sample_every = 10;
    const DiagnosticsRecord record = run(s, cfg, p, pb.grid, pb.prof, obs);
    REQUIRE(record.samples.size() == 11);
    CHECK(record.info.steps == 100);
    for (std::size_t k = 0; k < record.samples.size(); ++k)
        CHECK(record.samples[k].t == Approx(1e-3 * static_cast<double>(k)).margin(1e-15));
}

TEST_CASE("coarse grids are flagged as under-resolved") {
    const DimensionlessParameters p = testing::channel_baseline();
    for (auto [intervals, flagged] : {std::pair<std::size_t, bool>{20, true}, {200, false}}) {
        const Problem pb(p, intervals);
        FieldState s = initial_state(p, pb.grid, pb.prof);
        StepperConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_end = 2e-3;
        const DiagnosticsRecord record = run(s, cfg, p, pb.grid, pb.prof);
        CHECK(record.info.under_resolved == flagged);
    }
}

TEST_CASE("non-finite states abort the run with the last good time") {
    const DimensionlessParameters p = testing::channel_baseline();
    const Problem pb(p, 16);
    FieldState s = initial_state(p, pb.grid, pb.prof);
    s.c[0][3] = std::numeric_limits<double>::quiet_NaN();
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.01;
    CHECK_THROWS_AS(run(s, cfg, p, pb.grid, pb.prof), NumericalError);
}

TEST_CASE("a steady threshold stops the run early") {
    DimensionlessParameters p = testing::channel_baseline();
    p.phi_minus = p.phi_plus = 0.0;
    const Problem pb(p, 16);
    FieldState s = equilibrium_state(pb, 1.0);
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 1.0;
    RunObservers obs;
    obs.steady_threshold = 1e-6;
    const DiagnosticsRecord record = run(s, cfg, p, pb.grid, pb.prof, obs);
    CHECK(record.info.stopped_at_steady_state);
    CHECK(record.info.steps < 5);
}

TEST_CASE("negative concentrations are reported, not clipped") {
    // A fabricated state with a small negative dip keeps stepping; the record
    // notes the count and the most negative value seen.
    const DimensionlessParameters p = testing::channel_baseline();
    const Problem pb(p, 32);
    FieldState s = initial_state(p, pb.grid, pb.prof);
    s.c[0][10] = -1e-2;
    s.phi = solve_poisson(s.c, p, pb.grid, pb.prof);
    StepperConfig cfg;
    cfg.dt = 1e-8;
    cfg.t_end = 3e-8;
    const DiagnosticsRecord record = run(s, cfg, p, pb.grid, pb.prof);
    CHECK(record.info.negative_concentration_steps > 0);
    CHECK(record.info.most_negative_concentration < 0.0);
    CHECK(record.info.most_negative_concentration > -1e-2);
}

TEST_CASE("pure diffusion converges at second order against the exact solution") {
    // z = 0 decouples the potential; the first even no-flux mode
    // c = 1 + 0.1 exp(-lambda^2 t) cos(lambda (x+1)), lambda = pi/2,
    // is the exact solution of the remaining heat problem.
    DimensionlessParameters p = testing::channel_baseline();
    p.z = {0.0, 0.0};
    p.phi_minus = p.phi_plus = 0.0;
    const double lambda = std::numbers::pi / 2.0;
    const double t_final = 0.05;
    auto exact = [&](double x, double t) {
        return 1.0 + 0.1 * std::exp(-lambda * lambda * t) * std::cos(lambda * (x + 1.0));
    };
    auto max_error = [&](std::size_t intervals, BoundaryScheme scheme) {
        const Problem pb(p, intervals);
        FieldState s;
        s.t = 0.0;
        s.c.assign(2, std::vector<double>(pb.grid.n_nodes()));
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < pb.grid.n_nodes(); ++j)
                s.c[i][j] = exact(pb.grid.nodes[j], 0.0);
        s.phi = solve_poisson(s.c, p, pb.grid, pb.prof);
        StepperConfig cfg;
        cfg.dt = 2e-5;
        cfg.t_end = t_final;
        cfg.scheme = scheme;
        integrate_to(s, cfg, p, pb.grid, pb.prof);
        double worst = 0.0;
        for (std::size_t j = 0; j < pb.grid.n_nodes(); ++j)
            worst = std::max(worst, std::abs(s.c[0][j] - exact(pb.grid.nodes[j], t_final)));
        return worst;
    };
    for (auto scheme : {BoundaryScheme::Conservative, BoundaryScheme::Standard}) {
        const double coarse = max_error(64, scheme);
        const double fine = max_error(128, scheme);
        INFO(to_string(scheme) << ": errors " << coarse << " -> " << fine);
        CHECK(coarse / fine == Approx(4.0).epsilon(0.2));
    }
}
