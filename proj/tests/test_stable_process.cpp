#include "doctest.h"

#include "fhl/stable_process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

using namespace fhl;

namespace {

// Two-sided KS statistic against a continuous CDF.
double ks_stat(std::vector<double> draws, const std::function<double(double)>& cdf) {
    std::sort(draws.begin(), draws.end());
    const double n = static_cast<double>(draws.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const double c = cdf(draws[i]);
        worst = std::max(worst, std::fabs(c - static_cast<double>(i) / n));
        worst = std::max(worst, std::fabs(static_cast<double>(i + 1) / n - c));
    }
    return worst;
}

// CDF of D_1 for beta = 1/2: P(D <= s) = erfc(1/(2 sqrt(s))).
double levy_cdf(double s) { return s <= 0.0 ? 0.0 : std::erfc(0.5 / std::sqrt(s)); }

double levy_pdf(double s) {
    return std::exp(-0.25 / s) / (2.0 * std::sqrt(std::numbers::pi) * std::pow(s, 1.5));
}

} // namespace

TEST_CASE("Laplace transform of the stable draws matches exp(-s^beta)") {
    for (double b : {0.3, 0.5, 0.8}) {
        const FractionalOrder beta(b);
        const auto sample = sample_stable(beta, 100000, 11);
        for (double s : {0.5, 1.0, 2.0}) {
            double mean = 0.0, sq = 0.0;
            for (double d : sample.values) {
                const double v = std::exp(-s * d);
                mean += v;
                sq += v * v;
            }
            const double n = static_cast<double>(sample.values.size());
            mean /= n;
            const double se = std::sqrt((sq / n - mean * mean) / (n - 1.0));
            const double exact = std::exp(-std::pow(s, b));
            CHECK(std::fabs(mean - exact) <= 3.0 * se + 1e-12);
        }
    }
}

TEST_CASE("beta = 1/2 draws follow the closed-form one-sided law") {
    const FractionalOrder beta(0.5);
    const auto sample = sample_stable(beta, 20000, 3);
    // Exact law, fixed seed: 1.95/sqrt(n) is the p ~ 0.001 band.
    CHECK(ks_stat(sample.values, levy_cdf) < 1.95 / std::sqrt(20000.0));
}

TEST_CASE("beta near 1 concentrates the subordinator at its drift") {
    const FractionalOrder beta(0.999);
    auto sample = sample_stable(beta, 20000, 5);
    std::nth_element(sample.values.begin(), sample.values.begin() + 10000, sample.values.end());
    const double median = sample.values[10000];
    CHECK(median > 0.8);
    CHECK(median < 1.25);
}

TEST_CASE("stable_pdf and stable_survival match the beta = 1/2 closed forms") {
    const FractionalOrder beta(0.5);
    for (double s : {0.3, 1.0, 3.0}) {
        CHECK(stable_pdf(beta, s) == doctest::Approx(levy_pdf(s)).epsilon(1e-5));
        CHECK(stable_survival(beta, s) == doctest::Approx(1.0 - levy_cdf(s)).epsilon(1e-5));
    }
    // Spec-level pin: (1/(2 sqrt(pi))) e^{-1/4} at s = 1.
    CHECK(stable_pdf(beta, 1.0) == doctest::Approx(0.21970).epsilon(1e-4));
}

TEST_CASE("survival is the integral of the density for generic beta") {
    for (double b : {0.3, 0.8}) {
        const FractionalOrder beta(b);
        for (double s : {0.5, 1.5}) {
            const double h = 1e-4;
            const double deriv =
                (stable_survival(beta, s + h) - stable_survival(beta, s - h)) / (2.0 * h);
            CHECK(-deriv == doctest::Approx(stable_pdf(beta, s)).epsilon(1e-3));
        }
    }
}

TEST_CASE("inverse_pdf reproduces the half-Gaussian closed form at beta = 1/2") {
    const FractionalOrder beta(0.5);
    CHECK(inverse_pdf(beta, 1.0, 1.0) == doctest::Approx(0.43939).epsilon(1e-4));
    CHECK(inverse_pdf(beta, 2.0, 4.0) == doctest::Approx(0.21970).epsilon(1e-4));
    for (double s : {0.2, 0.7, 1.9}) {
        for (double t : {0.5, 1.0, 2.0}) {
            const double exact =
                std::exp(-s * s / (4.0 * t)) / std::sqrt(std::numbers::pi * t);
            CHECK(inverse_pdf(beta, s, t) == doctest::Approx(exact).epsilon(1e-5));
        }
    }
}

TEST_CASE("inverse moments match the Gamma-ratio identity") {
    const FractionalOrder beta(0.7);
    for (double lambda : {1.0, 2.0, 3.5}) {
        for (double t : {0.5, 2.0}) {
            const double exact = beta.moment_constant(lambda) * std::pow(t, lambda * 0.7);
            CHECK(inverse_moment(beta, lambda, t) == doctest::Approx(exact).epsilon(1e-12));
        }
    }
}

TEST_CASE("inverse sampling at t = 0 yields exact zeros") {
    const FractionalOrder beta(0.4);
    const auto sample = sample_inverse(beta, 0.0, 100, 9);
    for (double v : sample.values) CHECK(v == 0.0);
}

TEST_CASE("sampled inverse moments agree with the identity at 3 sigma") {
    const FractionalOrder beta(0.5);
    const auto sample = sample_inverse(beta, 1.0, 100000, 2);
    for (double lambda : {1.0, 2.0}) {
        double mean = 0.0, sq = 0.0;
        for (double v : sample.values) {
            const double p = std::pow(v, lambda);
            mean += p;
            sq += p * p;
        }
        const double n = static_cast<double>(sample.values.size());
        mean /= n;
        const double se = std::sqrt((sq / n - mean * mean) / (n - 1.0));
        CHECK(std::fabs(mean - inverse_moment(beta, lambda, 1.0)) <= 3.0 * se);
    }
}

TEST_CASE("draw i is a pure function of (seed, i): worker count is invisible") {
    const FractionalOrder beta(0.6);
    const auto one = sample_stable(beta, 5000, 42, 1);
    const auto many = sample_stable(beta, 5000, 42, 7);
    REQUIRE(one.values.size() == many.values.size());
    for (std::size_t i = 0; i < one.values.size(); ++i) CHECK(one.values[i] == many.values[i]);

    const auto inv1 = sample_inverse(beta, 1.5, 5000, 42, 1);
    const auto inv8 = sample_inverse(beta, 1.5, 5000, 42, 8);
    for (std::size_t i = 0; i < inv1.values.size(); ++i) CHECK(inv1.values[i] == inv8.values[i]);
}

TEST_CASE("one shared draw couples E_t monotonically across t") {
    const FractionalOrder beta(0.5);
    const auto lo = sample_inverse(beta, 0.5, 4000, 13);
    const auto hi = sample_inverse(beta, 1.0, 4000, 13);
    for (std::size_t i = 0; i < lo.values.size(); ++i) CHECK(lo.values[i] <= hi.values[i]);
}

TEST_CASE("kanter_a is increasing on (0, pi)") {
    for (double b : {0.3, 0.7}) {
        double prev = kanter_a(b, 0.05);
        for (double phi = 0.35; phi < std::numbers::pi; phi += 0.3) {
            const double cur = kanter_a(b, phi);
            CHECK(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("kanter_draw rejects out-of-range inputs") {
    const FractionalOrder beta(0.5);
    CHECK_THROWS_AS((void)kanter_draw(beta, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)kanter_draw(beta, 0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)sample_inverse(beta, -1.0, 10, 0), std::invalid_argument);
}
