#pragma once

#include "fhl/fractional_order.hpp"

#include <cstdint>
#include <vector>

namespace fhl {

/// Draws of the one-sided stable subordinator marginal D_1, normalised so
/// that E[exp(-s D_1)] = exp(-s^beta).
struct StableSample {
    double beta;
    std::uint64_t seed;
    std::vector<double> values;
};

/// Draws of the inverse subordinator E_t at a fixed time, realised through
/// the marginal identity E_t = (t / D_1)^beta path by path.
struct InverseSample {
    double beta;
    double t;
    std::uint64_t seed;
    std::vector<double> values;
};

/// Kanter's representation of the positive stable law: one uniform angle on
/// (0,pi) and one unit exponential per draw, no rejection. Exposed so the
/// construction can be exercised against its distributional oracles directly.
double kanter_draw(const FractionalOrder& beta, double uniform_angle, double uniform_exp);

/// Integrand factor of Kanter's representation, increasing on (0,pi).
double kanter_a(double beta, double phi);

/// Sample n draws of D_1. Draw i depends only on (seed, i), so results are
/// identical for any worker count or evaluation order.
StableSample sample_stable(const FractionalOrder& beta, std::size_t n, std::uint64_t seed,
                           int workers = 0);

/// Sample n draws of E_t. t = 0 yields exact zeros.
InverseSample sample_inverse(const FractionalOrder& beta, double t, std::size_t n,
                             std::uint64_t seed, int workers = 0);

/// E[E_t^lambda] = Gamma(lambda+1)/Gamma(lambda*beta+1) * t^(lambda*beta).
double inverse_moment(const FractionalOrder& beta, double lambda, double t);

/// Density of D_1 at s > 0 via the single-integral representation matching
/// Kanter's construction, adaptive quadrature, ~1e-6 relative accuracy away
/// from the s -> 0 tail (where the value underflows and 0 is returned).
double stable_pdf(const FractionalOrder& beta, double s);

/// P(D_1 > x); shares the integral representation with stable_pdf.
double stable_survival(const FractionalOrder& beta, double x);

/// Density of E_t at s > 0: (t/beta) s^(-1-1/beta) * stable_pdf(t s^(-1/beta)).
double inverse_pdf(const FractionalOrder& beta, double s, double t);

} // namespace fhl
