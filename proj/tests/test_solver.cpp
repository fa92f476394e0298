#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "growcoag/solver.hpp"

using namespace growcoag;

namespace {

struct Desk {
    std::shared_ptr<const SizeGrid> grid;
    DensityState c0;
    GrowthField zero_field = make_growth_field(ZeroGrowth{}, 0.1, 0.1);
    Desk(double vmin, double vmax, int cells)
        : grid(SizeGrid::geometric(vmin, vmax, cells)),
          c0(project_initial(Exponential{1.0}, grid)) {}
};

} // namespace

TEST_CASE("window length formula") {
    auto spec = make_kernel(ConstantKernel{1.0});
    auto kn = truncate(spec, 10); // beta_n = 1
    CHECK(window_length(kn, 1.0, std::nullopt) == doctest::Approx(1.0 / 14.0).epsilon(1e-14));

    kn.beta_n = 4.0;
    CHECK(window_length(kn, 1.0, std::nullopt) == doctest::Approx(1.0 / 56.0).epsilon(1e-14));
    CHECK(window_length(kn, 0.5, std::nullopt) == doctest::Approx(1.0 / 28.0).epsilon(1e-14));

    auto zero = truncate(make_kernel(ConstantKernel{0.0}), 10);
    CHECK(window_length(zero, 1.0, 0.25) == 0.25);
    CHECK(std::isinf(window_length(zero, 1.0, std::nullopt)));
    CHECK(window_length(kn, 1.0, 0.001) == 0.001);
}

TEST_CASE("the update map is the identity without kernel and growth") {
    Desk desk(1e-4, 1e2, 128);
    const auto kn = truncate(make_kernel(ConstantKernel{0.0}), 10);
    const auto table = build_pair_table(kn, desk.grid);
    const auto u = constant_trajectory(desk.c0, 0.0, 0.25, 8);
    const auto w = apply_Tn(u, desk.c0, table, desk.zero_field, 0.0);
    for (const auto& state : w.states)
        for (int i = 0; i < desk.grid->cells(); ++i)
            CHECK(state.values[i] == desk.c0.values[i]);
}

TEST_CASE("pure transport reproduces the dilation closed form") {
    Desk desk(1e-4, 1e2, 512);
    const auto field = make_growth_field(LinearGrowth{0.5}, 0.6, 0.1);
    const auto kn = truncate(make_kernel(ConstantKernel{0.0}), 10);
    const auto table = build_pair_table(kn, desk.grid);
    const auto u = constant_trajectory(desk.c0, 0.0, 0.5, 8);
    const auto w = apply_Tn(u, desk.c0, table, field, 0.0);

    const double t = w.times.back();
    const auto& last = w.states.back();
    double l1_err = 0.0;
    for (int i = 0; i < desk.grid->cells(); ++i) {
        const double x = desk.grid->center(i);
        const double exact = std::exp(-x * std::exp(-0.5 * t)) * std::exp(-0.5 * t);
        l1_err += std::abs(last.values[i] - exact) * desk.grid->width(i);
    }
    CHECK(l1_err <= 1e-3);
}

TEST_CASE("the kappa shift keeps the integrand nonnegative on the invariant set") {
    Desk desk(1e-4, 1e2, 256);
    const auto kn = truncate(make_kernel(StirredFroth{0.5}, 0.3, 1.0), 8);
    const auto table = build_pair_table(kn, desk.grid);
    const double kappa = kn.beta_n * moment(desk.c0, 0.0);
    const auto q = apply_Qn(desk.c0, table);
    double scale = 0.0;
    for (double v : desk.c0.values)
        scale = std::max(scale, kappa * v);
    for (int i = 0; i < desk.grid->cells(); ++i)
        CHECK(q.rate[i] + kappa * desk.c0.values[i] >= -1e-10 * scale);
}

TEST_CASE("picard iteration") {
    Desk desk(1e-4, 1e2, 256);
    SolverConfig cfg;

    SUBCASE("zero kernel converges in one application") {
        const auto kn = truncate(make_kernel(ConstantKernel{0.0}), 10);
        const auto table = build_pair_table(kn, desk.grid);
        const auto [traj, report] = picard_solve(desk.c0, cfg, table, desk.zero_field, 0.25);
        CHECK(report.converged);
        CHECK(report.picard_iterations == 1);
        CHECK(report.final_residual == 0.0);
        CHECK(traj.states.size() == 9);
    }
    SUBCASE("zero initial data stays at zero") {
        const auto kn = truncate(make_kernel(ConstantKernel{1.0}), 10);
        const auto table = build_pair_table(kn, desk.grid);
        const auto [traj, report] =
            picard_solve(zero_state(desk.grid), cfg, table, desk.zero_field, 0.25);
        CHECK(report.converged);
        CHECK(report.picard_iterations == 1);
        for (const auto& state : traj.states)
            for (double v : state.values)
                CHECK(v == 0.0);
    }
    SUBCASE("constant kernel contracts within the proven factor plus slack") {
        const auto kn = truncate(make_kernel(ConstantKernel{1.0}), 50);
        const auto table = build_pair_table(kn, desk.grid);
        const double tw = window_length(kn, moment(desk.c0, 0.0), std::nullopt);
        CHECK(tw == doctest::Approx(1.0 / 14.0).epsilon(2e-3));
        const auto [traj, report] = picard_solve(desk.c0, cfg, table, desk.zero_field, tw);
        CHECK(report.converged);
        CHECK(report.picard_iterations <= 60);
        for (double ratio : report.contraction_ratios)
            CHECK(ratio <= 0.55);
        CHECK(report.final_residual <= cfg.picard_tol);
        CHECK(report.pn_ok);
    }
    SUBCASE("iteration budget of one forces a nonconvergence error") {
        const auto kn = truncate(make_kernel(ConstantKernel{1.0}), 50);
        const auto table = build_pair_table(kn, desk.grid);
        SolverConfig tight = cfg;
        tight.picard_max_iters = 1;
        try {
            picard_solve(desk.c0, tight, table, desk.zero_field, 1.0 / 14.0);
            FAIL("expected NonconvergenceError");
        } catch (const NonconvergenceError& err) {
            CHECK(err.residuals.size() == 1);
            CHECK(err.residuals.front() > tight.picard_tol);
        }
    }
}

TEST_CASE("pure transport solve tracks the closed-form moments") {
    Desk desk(1e-4, 1e2, 1024);
    const auto field = make_growth_field(LinearGrowth{0.5}, 0.6, 0.1);
    const auto kn = truncate(make_kernel(ConstantKernel{0.0}), 10);
    SolverConfig cfg;
    cfg.t_final = 1.0;
    cfg.window_cap = 1.0; // single window: one pullback, no chaining error
    cfg.substeps_per_window = 32;
    const auto result = solve(desk.c0, cfg, kn, field);
    CHECK(result.completed);

    const double m1_ratio = result.moments.rows.back().m1 / result.moments.rows.front().m1;
    CHECK(m1_ratio == doctest::Approx(std::exp(0.5)).epsilon(1e-4));
    const double m2_ratio = result.moments.rows.back().m2 / result.moments.rows.front().m2;
    CHECK(m2_ratio == doctest::Approx(std::exp(1.0)).epsilon(1e-3));
    CHECK(result.moments.m1_balance_ok);
    CHECK(result.moments.m0_monotone_ok);
    CHECK(result.moments.mneg2beta_ok);
    CHECK(result.moments.nonneg_ok);
}

TEST_CASE("constant kernel solve approaches the classical number decay") {
    // truncation chosen wide enough that the inert mass below 1/n is ~1e-3
    const auto grid = SizeGrid::geometric(1e-5, 2e3, 256);
    const auto c0 = project_initial(Exponential{1.0}, grid);
    const auto field = make_growth_field(ZeroGrowth{}, 0.1, 0.1);
    const auto kn = truncate(make_kernel(ConstantKernel{1.0}), 1000);
    SolverConfig cfg;
    cfg.t_final = 2.0;
    const auto result = solve(c0, cfg, kn, field);
    CHECK(result.completed);

    const auto& rows = result.moments.rows;
    CHECK(rows.back().m0 == doctest::Approx(0.5).epsilon(0.01));
    // pure coagulation conserves mass
    CHECK(rows.back().m1 == doctest::Approx(rows.front().m1).epsilon(1e-6));
    // second moment of the constant-kernel solution grows linearly: 1 + t/2
    CHECK(rows.back().m2 / rows.front().m2 == doctest::Approx(2.0).epsilon(0.02));
    CHECK(result.moments.all_ok());
    CHECK(result.moments.total_clamped_number <= 1e-8 * rows.front().m0);
    for (const auto& w : result.windows) {
        CHECK(w.converged);
        CHECK(w.pn_ok);
        for (double r : w.contraction_ratios)
            CHECK(r <= 0.55);
    }
}

TEST_CASE("weak-form residual with the constant test function") {
    Desk desk(1e-4, 1e2, 192);
    const auto kn = truncate(make_kernel(StirredFroth{0.5}, 0.3, 1.0), 4);
    const auto table = build_pair_table(kn, desk.grid);
    SolverConfig cfg;
    cfg.t_final = 0.2;
    const auto result = solve(desk.c0, cfg, table, desk.zero_field);
    CHECK(result.completed);

    // d/dt M0 against the collision functional -1/2 iint K_n c c, trapezoid
    for (std::size_t r = 0; r + 1 < result.history.size(); ++r) {
        auto rhs = [&](const DensityState& s) {
            double sum = 0.0;
            const auto q = apply_Qn(s, table);
            for (int i = 0; i < desk.grid->cells(); ++i)
                sum += q.rate[i] * desk.grid->width(i);
            return sum + q.overflow_number_rate;
        };
        const double r0 = rhs(result.history[r]);
        const double r1 = rhs(result.history[r + 1]);
        const double dt = result.times[r + 1] - result.times[r];
        const double slope = (moment(result.history[r + 1], 0.0) -
                              moment(result.history[r], 0.0)) /
                             dt;
        const double mid = 0.5 * (r0 + r1);
        CHECK(std::abs(slope - mid) <= 1e-4 * std::max(std::abs(mid), 1e-6));
    }
}

TEST_CASE("solve aborts with partial results when a window cannot converge") {
    Desk desk(1e-4, 1e2, 128);
    const auto kn = truncate(make_kernel(ConstantKernel{1.0}), 50);
    SolverConfig cfg;
    cfg.t_final = 0.5;
    cfg.picard_max_iters = 1;
    const auto result = solve(desk.c0, cfg, kn, desk.zero_field);
    CHECK_FALSE(result.completed);
    CHECK_FALSE(result.windows.empty());
    CHECK_FALSE(result.windows.back().converged);
    CHECK(result.windows.back().residuals.size() == 1);
}

TEST_CASE("requested output times snap to the lattice") {
    Desk desk(1e-4, 1e2, 128);
    const auto kn = truncate(make_kernel(ConstantKernel{1.0}), 50);
    SolverConfig cfg;
    cfg.t_final = 0.3;
    cfg.output_times = {0.0, 0.1234, 0.3};
    const auto result = solve(desk.c0, cfg, kn, desk.zero_field);
    CHECK(result.completed);
    REQUIRE(result.outputs.size() == 3);
    CHECK(result.output_times[0] == 0.0);
    CHECK(result.output_times[2] == doctest::Approx(0.3).epsilon(1e-12));
    // the middle one is some lattice time near the request
    bool found = false;
    for (double t : result.times)
        if (t == result.output_times[1])
            found = true;
    CHECK(found);
    CHECK(std::abs(result.output_times[1] - 0.1234) <= 0.01);
}
