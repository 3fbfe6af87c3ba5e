#include "doctest.h"

#include "fhl/common.hpp"
#include "fhl/hopflax_field.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace fhl;

namespace {

// Identity quotient on [0,10], quadratic pair with C = sqrt(2) K, g(y) = y:
// away from the lower boundary u(x,t) = x - E[E_t]/2.
struct ClosedFormRig {
    QuotientModel model = build_identity_quotient(make_uniform_grid(0.0, 10.0, 401));
    LagrangianPair pair = LagrangianPair::quadratic(std::sqrt(2.0) * 10.0);
};

EvaluationConfig fine_config(double beta) {
    EvaluationConfig cfg{FractionalOrder(beta)};
    cfg.n_paths = 20000;
    cfg.seed = 17;
    cfg.time_grid = {0.25, 0.5, 1.0};
    cfg.x_stride = 50;  // evaluate at x = 0, 1.25, ..., 10
    return cfg;
}

} // namespace

TEST_CASE("Monte Carlo field matches the closed form away from the boundary") {
    ClosedFormRig rig;
    const auto cfg = fine_config(0.5);
    const auto field = evaluate_u(rig.model, rig.pair, cfg);
    REQUIRE(field.nx() == 9);
    REQUIRE(field.nt() == 3);
    CHECK(field.monotonicity_violations == 0);

    const FractionalOrder beta(0.5);
    for (std::size_t xi = 0; xi < field.nx(); ++xi) {
        const double x = field.x_point(xi)[0];
        if (x < 5.0) continue;  // lower-boundary truncation region
        for (std::size_t ti = 0; ti < field.nt(); ++ti) {
            const double t = field.time_grid[ti];
            const double want = x - 0.5 * beta.moment_constant(1.0) * std::sqrt(t);
            const double tol = 3.0 * field.se_at(xi, ti) + 1.5e-3;
            CHECK(std::fabs(field.u_at(xi, ti) - want) <= tol);
        }
    }
    // t = 0 row carries the exact datum.
    for (std::size_t xi = 0; xi < field.nx(); ++xi)
        CHECK(field.g_row[xi] == field.x_point(xi)[0]);
}

TEST_CASE("single-point base with positive L(0) gives the c t^beta field exactly") {
    const auto model = build_identity_quotient({2.0});
    auto pts = make_uniform_grid(-1.0, 1.0, 21);
    std::vector<double> vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = 0.5 * pts[i] * pts[i] + 0.3;
    const GridFunction L(std::move(pts), std::move(vals));
    const auto pair =
        LagrangianPair::from_tabulated(L, make_uniform_grid(-2.0, 2.0, 41), 5.0);

    EvaluationConfig cfg{FractionalOrder(0.5)};
    cfg.n_paths = 20000;
    cfg.seed = 3;
    cfg.time_grid = {0.5, 1.0};
    const auto field = evaluate_u(model, pair, cfg);

    const FractionalOrder beta(0.5);
    for (std::size_t ti = 0; ti < field.nt(); ++ti) {
        // Only candidate: zero displacement, so u = g + L(0) E[E_t].
        const double want =
            2.0 + 0.3 * beta.moment_constant(1.0) * std::sqrt(field.time_grid[ti]);
        CHECK(std::fabs(field.u_at(0, ti) - want) <= 3.0 * field.se_at(0, ti));
        CHECK(field.argmin[ti] == 0);
    }
}

TEST_CASE("gradient validity flags a terminal-datum kink and clears smooth cells") {
    auto points = make_uniform_grid(0.0, 10.0, 41);
    std::vector<double> g(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) g[i] = std::fabs(points[i] - 5.0);
    QuotientModel model = build_identity_quotient(points);
    model.g_values = g;  // corner at y = 5

    const auto pair = LagrangianPair::quadratic(std::sqrt(2.0) * 10.0);
    EvaluationConfig cfg{FractionalOrder(0.5)};
    cfg.n_paths = 20000;
    cfg.seed = 21;
    cfg.time_grid = {0.02};
    const auto field = evaluate_u(model, pair, cfg);

    const auto at_kink = gradient_Du(field, 20, 0);  // x = 5
    CHECK_FALSE(at_kink.valid);

    const auto smooth = gradient_Du(field, 8, 0);  // x = 2, descending side
    CHECK(smooth.valid);
    CHECK(std::fabs(smooth.value + 1.0) <= 5.0 * smooth.noise + 5e-3);
}

TEST_CASE("worker count never changes a single stored byte of the field") {
    ClosedFormRig rig;
    EvaluationConfig cfg{FractionalOrder(0.5)};
    cfg.n_paths = 5000;
    cfg.seed = 99;
    cfg.time_grid = {0.5, 1.0};
    cfg.x_stride = 40;
    cfg.workers = 1;
    const auto a = evaluate_u(rig.model, rig.pair, cfg);
    cfg.workers = 8;
    const auto b = evaluate_u(rig.model, rig.pair, cfg);

    REQUIRE(a.u.size() == b.u.size());
    for (std::size_t i = 0; i < a.u.size(); ++i) {
        CHECK(a.u[i] == b.u[i]);
        CHECK(a.se[i] == b.se[i]);
        CHECK(a.argmin[i] == b.argmin[i]);
        CHECK(a.cov_near[i] == b.cov_near[i]);
        CHECK(a.cov_skip[i] == b.cov_skip[i]);
    }
    CHECK(a.monotonicity_violations == b.monotonicity_violations);
}

TEST_CASE("conditioning keeps the erfc(1/(2 sqrt(t))) fraction at beta = 1/2") {
    ClosedFormRig rig;
    EvaluationConfig cfg{FractionalOrder(0.5)};
    cfg.n_paths = 100000;
    cfg.seed = 7;
    cfg.time_grid = {0.1, 1.0};
    cfg.x_stride = 100;
    cfg.condition_et_ge_1 = true;
    const auto field = evaluate_u(rig.model, rig.pair, cfg);
    CHECK(field.conditioned);

    for (std::size_t ti = 0; ti < field.nt(); ++ti) {
        // P(E_t >= 1) = P(D <= t) = erfc(1/(2 sqrt(t))) for beta = 1/2.
        const double p = std::erfc(0.5 / std::sqrt(field.time_grid[ti]));
        const double se = std::sqrt(p * (1.0 - p) / 100000.0);
        CHECK(std::fabs(field.acceptance[ti] - p) <= 4.0 * se);
        CHECK(field.accepted[ti] ==
              static_cast<std::size_t>(field.acceptance[ti] * 100000.0 + 0.5));
    }
}

TEST_CASE("deterministic comparator is the plain grid Hopf-Lax") {
    ClosedFormRig rig;
    const std::vector<double> times = {0.5, 1.0, 2.0};
    const auto det = evaluate_deterministic_u(rig.model, rig.pair, times, 50);
    const std::size_t nt = times.size();
    for (std::size_t xi = 0; xi < 9; ++xi) {
        const double x = 1.25 * static_cast<double>(xi);
        for (std::size_t ti = 0; ti < nt; ++ti) {
            const double t = times[ti];
            // min_y (x-y)^2/(2t) + y = x - t/2 once y* = x - t stays inside.
            if (x - t < 0.0) continue;
            const double h = 0.025;
            CHECK(std::fabs(det[xi * nt + ti] - (x - 0.5 * t)) <= h * h / (2.0 * t) + 1e-12);
        }
    }
}

TEST_CASE("inner minimisation takes the E -> 0 limit along zero displacement") {
    const auto pair = LagrangianPair::quadratic(3.0);
    const std::vector<double> sqd = {4.0, 0.0, 1.0};
    const std::vector<double> disp = {};
    const std::vector<double> g = {-5.0, 2.0, 0.5};
    int arg = -1;
    // Vanishing clock: only the zero-displacement candidate survives.
    const double v0 = inner_min_value(pair, sqd, disp, g, 0.0, arg);
    CHECK(v0 == 2.0);
    CHECK(arg == 1);

    // Positive clock: perspective cost competes normally.
    const double v1 = inner_min_value(pair, sqd, disp, g, 1.0, arg);
    CHECK(v1 == doctest::Approx(-3.0));
    CHECK(arg == 0);
}

TEST_CASE("configuration sanity is enforced before any sampling") {
    ClosedFormRig rig;
    EvaluationConfig cfg{FractionalOrder(0.5)};
    cfg.time_grid = {1.0, 0.5};
    CHECK_THROWS_AS((void)evaluate_u(rig.model, rig.pair, cfg), std::invalid_argument);
    cfg.time_grid = {0.5, 1.0};
    cfg.x_stride = 7;  // 400 % 7 != 0
    CHECK_THROWS_AS((void)evaluate_u(rig.model, rig.pair, cfg), std::invalid_argument);
    cfg.x_stride = 1;
    cfg.n_paths = 1;
    CHECK_THROWS_AS((void)evaluate_u(rig.model, rig.pair, cfg), std::invalid_argument);
}

TEST_CASE("classical baseline equals the intrinsic field on the identity quotient") {
    const auto g = GridFunction(make_uniform_grid(0.0, 10.0, 41),
                                make_uniform_grid(0.0, 10.0, 41));
    const auto pair = LagrangianPair::quadratic(std::sqrt(2.0) * 10.0);
    EvaluationConfig cfg{FractionalOrder(0.5)};
    cfg.n_paths = 4000;
    cfg.seed = 5;
    cfg.time_grid = {0.5};
    cfg.x_stride = 8;
    const auto classical = evaluate_classical_v(g, pair, cfg);

    const auto model = build_identity_quotient(make_uniform_grid(0.0, 10.0, 41));
    const auto intrinsic = evaluate_u(model, pair, cfg);
    REQUIRE(classical.u.size() == intrinsic.u.size());
    for (std::size_t i = 0; i < classical.u.size(); ++i)
        CHECK(classical.u[i] == intrinsic.u[i]);
}
