#include "doctest.h"

#include "fhl/common.hpp"
#include "fhl/verification.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

using namespace fhl;

namespace {

const double kGrowth = std::sqrt(2.0) * 10.0;

QuotientModel closed_form_model(std::size_t count = 41) {
    return build_identity_quotient(make_uniform_grid(0.0, 10.0, count));
}

ValueField mc_field(const QuotientModel& model, std::vector<double> times, std::size_t n_paths,
                    bool conditioned, std::size_t stride = 1) {
    const auto pair = LagrangianPair::quadratic(kGrowth);
    EvaluationConfig cfg{FractionalOrder(0.5)};
    cfg.n_paths = n_paths;
    cfg.seed = 12;
    cfg.time_grid = std::move(times);
    cfg.condition_et_ge_1 = conditioned;
    cfg.x_stride = stride;
    return evaluate_u(model, pair, cfg);
}

// Hand-built field over the identity quotient on {0, 1, ..., nx-1}.
ValueField synthetic_field(std::size_t nx, std::vector<double> time_grid,
                           const std::vector<double>& u_rows, double se_value) {
    ValueField f;
    f.beta = 0.5;
    f.seed = 0;
    f.n_paths = 1000;
    f.base_dim = 1;
    const std::size_t nt = time_grid.size();
    f.time_grid = std::move(time_grid);
    for (std::size_t i = 0; i < nx; ++i) {
        f.x_points.push_back(static_cast<double>(i));
        f.x_index.push_back(i);
        f.g_row.push_back(u_rows[i * nt]);  // datum = first row value
    }
    f.u = u_rows;
    f.se.assign(nx * nt, se_value);
    f.argmin.assign(nx * nt, 0);
    f.cov_near.assign(nx * nt, 0.0);
    f.cov_skip.assign(nx * nt, 0.0);
    f.acceptance.assign(nt, 1.0);
    f.accepted.assign(nt, 1000);
    return f;
}

} // namespace

TEST_CASE("moment check passes on the true sampler and counts its cells") {
    const auto check = verify_moments(FractionalOrder(0.5), {1.0, 2.0}, {0.5, 1.0}, 20000, 1);
    CHECK(check.passed());
    CHECK(check.status == CheckStatus::pass);
    CHECK(check.n_points_checked == 4);
    CHECK(check.margin > 0.0);
}

TEST_CASE("moment check treats t = 0 as one definitional zero row") {
    const auto check = verify_moments(FractionalOrder(0.5), {1.0, 2.0}, {0.0, 0.5, 1.0}, 20000, 1);
    CHECK(check.passed());
    CHECK(check.n_points_checked == 5);
    CHECK(check.margin == 0.0);
}

TEST_CASE("moment check fails when the sample is biased") {
    auto sample = sample_inverse(FractionalOrder(0.5), 1.0, 20000, 1);
    for (double& v : sample.values) v *= 1.2;
    const auto check = verify_moments(sample, {1.0});
    CHECK(check.status == CheckStatus::fail);
    CHECK(check.margin < 0.0);
}

TEST_CASE("distribution check accepts true draws at its tolerance") {
    const auto sample = sample_inverse(FractionalOrder(0.5), 1.0, 20000, 2);
    const auto check = verify_distribution(sample, 0.02);
    CHECK(check.passed());
    CHECK(check.budget.mc == 0.02);
}

TEST_CASE("spatial modulus holds on the closed-form field and fails when doctored") {
    const auto model = closed_form_model();
    const auto pair = LagrangianPair::quadratic(kGrowth);
    auto field = mc_field(model, {0.5, 1.0}, 10000, false);
    const auto check = verify_spatial_modulus(field, model, pair, kGrowth);
    CHECK(check.passed());
    CHECK(check.n_points_checked > 0);

    // An isolated outlier violates the two-point bound.
    field.u[0] += 25.0;
    const auto broken = verify_spatial_modulus(field, model, pair, kGrowth);
    CHECK(broken.status == CheckStatus::fail);
}

TEST_CASE("monotonicity passes on a decreasing field and fails on an increasing one") {
    const auto good = mc_field(closed_form_model(), {0.5, 1.0, 2.0}, 10000, false);
    CHECK(verify_monotonicity(good).passed());

    const auto bad = synthetic_field(
        2, {0.5, 1.0, 1.5},
        {4.0, 4.5, 5.0,
         4.0, 3.5, 3.0},
        1e-6);
    const auto check = verify_monotonicity(bad);
    CHECK(check.status == CheckStatus::fail);
    CHECK(check.margin < 0.0);
}

TEST_CASE("Hoelder check needs six time nodes to fit and validate") {
    const auto shallow = mc_field(closed_form_model(), {0.5, 1.0}, 4000, false);
    CHECK(verify_time_holder(shallow, 1.2).status == CheckStatus::inconclusive);

    const auto deep = mc_field(closed_form_model(),
                               {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0}, 10000, false, 8);
    const auto check = verify_time_holder(deep, 1.2);
    CHECK(check.passed());
    CHECK(check.n_points_checked > 0);
}

TEST_CASE("initial layer envelope and slope hold on a fine short-time run") {
    QuotientModel window = build_identity_quotient(make_uniform_grid(0.0, 1.0, 51));
    std::vector<double> times;
    for (int i = 0; i < 6; ++i) times.push_back(std::pow(10.0, -2.0 + 0.2 * i));
    const auto field = mc_field(window, times, 5000, false);
    const double c_bound = FractionalOrder(0.5).moment_constant(1.0) * 0.5;
    const auto check = verify_initial_layer(field, c_bound, 0.1);
    CHECK(check.passed());
    CHECK(check.n_points_checked == times.size());
}

TEST_CASE("DPP slack stays nonnegative with conditioning on") {
    const auto model = closed_form_model();
    const auto pair = LagrangianPair::quadratic(kGrowth);
    const auto field = mc_field(model, {0.5, 1.0, 2.0}, 20000, true);
    const std::vector<std::pair<std::size_t, std::size_t>> pairs = {{0, 1}, {1, 2}, {0, 2}};
    const auto check = verify_dpp(field, model, pair, kGrowth, pairs);
    CHECK(check.passed());
    CHECK(check.n_points_checked > 0);

    const std::vector<std::pair<std::size_t, std::size_t>> backwards = {{1, 0}};
    CHECK_THROWS_AS((void)verify_dpp(field, model, pair, kGrowth, backwards),
                    std::invalid_argument);
}

TEST_CASE("subsolution residual passes on the conditioned closed-form field") {
    const auto model = closed_form_model();
    const auto pair = LagrangianPair::quadratic(kGrowth);
    const auto field = mc_field(model, {0.5, 1.0, 1.5, 2.0}, 20000, true);
    const auto check = verify_subsolution(field, model, pair, kGrowth, 0.2);
    CHECK(check.passed());
    const auto& d = check.details;
    CHECK(d.at("violations").get<int>() == 0);
    CHECK(d.at("cells_checked").get<std::size_t>() == check.n_points_checked);
    CHECK(d.at("excluded_fraction").get<double>() <= 0.2);
}

TEST_CASE("mass gradient exclusion turns the subsolution check inconclusive") {
    const std::size_t nx = 9, nt = 2;
    std::vector<double> rows(nx * nt);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t k = 0; k < nt; ++k)
            rows[i * nt + k] = static_cast<double>(i) + (i == 3 ? 1.0 : 0.0);
    auto field = synthetic_field(nx, {0.5, 1.0}, rows, 1e-9);
    const auto model = build_identity_quotient(make_uniform_grid(0.0, 8.0, 9));
    const auto pair = LagrangianPair::quadratic(std::sqrt(2.0) * 8.0);
    const auto check = verify_subsolution(field, model, pair, std::sqrt(2.0) * 8.0, 0.2);
    CHECK(check.status == CheckStatus::inconclusive);
    CHECK(check.details.at("excluded_fraction").get<double>() > 0.2);
}

TEST_CASE("subsolution with no trustworthy gradient at all signals an error") {
    const auto rows = std::vector<double>{1.0, 1.0, 5.0, 5.0, 1.0, 1.0};
    auto field = synthetic_field(3, {0.5, 1.0}, rows, 1e-9);
    const auto model = build_identity_quotient(make_uniform_grid(0.0, 2.0, 3));
    const auto pair = LagrangianPair::quadratic(std::sqrt(2.0) * 2.0);
    CHECK_THROWS_AS((void)verify_subsolution(field, model, pair, std::sqrt(2.0) * 2.0, 0.5),
                    NumericalError);
}

TEST_CASE("reports serialise deterministically and carry every check field") {
    VerificationReport report;
    report.checks.push_back(verify_moments(FractionalOrder(0.5), {1.0}, {1.0}, 5000, 4));
    report.checks.push_back(
        verify_distribution(sample_inverse(FractionalOrder(0.5), 1.0, 5000, 4), 0.05));
    report.config_snapshot = nlohmann::ordered_json{{"preset", "identity-quadratic"}};
    report.constants = nlohmann::ordered_json{{"beta", 0.5}};

    const std::string a = report.to_json();
    const std::string b = report.to_json();
    CHECK(a == b);

    const auto parsed = nlohmann::json::parse(a);
    CHECK(parsed.contains("all_passed"));
    CHECK(parsed.contains("constants"));
    CHECK(parsed.contains("config"));
    REQUIRE(parsed.at("checks").size() == 2);
    for (const auto& c : parsed.at("checks")) {
        CHECK(c.contains("name"));
        CHECK(c.contains("statement"));
        CHECK(c.contains("status"));
        CHECK(c.contains("margin"));
        CHECK(c.contains("budget"));
        CHECK(c.at("budget").contains("mc"));
        CHECK(c.contains("n_points_checked"));
        CHECK(c.contains("details"));
        CHECK_FALSE(c.contains("wall_seconds"));
    }

    const std::string table = report.to_table();
    CHECK(table.find("inverse_moments") != std::string::npos);
    CHECK(table.find("PASS") != std::string::npos);
    CHECK(table.find("seconds") != std::string::npos);
    // The artifact variant must carry no timing so reruns are byte-identical.
    const std::string artifact = report.to_table(false);
    CHECK(artifact.find("inverse_moments") != std::string::npos);
    CHECK(artifact.find("seconds") == std::string::npos);
    CHECK(report.all_passed());
}
