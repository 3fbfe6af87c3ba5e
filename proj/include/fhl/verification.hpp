#pragma once

#include "fhl/convex_duality.hpp"
#include "fhl/fractional_order.hpp"
#include "fhl/hopflax_field.hpp"
#include "fhl/intrinsic_geometry.hpp"
#include "fhl/stable_process.hpp"

#include "json.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace fhl {

enum class CheckStatus { pass, fail, inconclusive };

const char* to_string(CheckStatus s);

/// Error allowance split by source; a check passes when its measured
/// discrepancy fits inside total().
struct ToleranceBudget {
    double mc = 0.0;    // Monte Carlo standard errors
    double fd = 0.0;    // finite-difference / time-discretisation error
    double grid = 0.0;  // spatial grid resolution
    double total() const { return mc + fd + grid; }
};

/// One verified property. margin is tolerance-inclusive signed slack:
/// non-negative means the property holds within budget (equivalently, the
/// raw discrepancy stays above -budget.total()).
struct PropertyCheck {
    std::string name;
    std::string statement;
    CheckStatus status = CheckStatus::fail;
    double margin = 0.0;
    ToleranceBudget budget;
    std::size_t n_points_checked = 0;
    nlohmann::ordered_json details;
    double wall_seconds = 0.0;  // console only, never serialized

    bool passed() const { return status == CheckStatus::pass; }
};

struct VerificationReport {
    std::vector<PropertyCheck> checks;
    nlohmann::ordered_json config_snapshot;  // the run configuration verbatim
    nlohmann::ordered_json constants;        // beta, K, ell, C

    bool all_passed() const;
    /// Deterministic serialization: no timings, no environment.
    std::string to_json() const;
    /// Human console table, includes wall-clock seconds.
    /// with_timing adds the wall-clock column; artifacts are written without
    /// it so report.txt stays byte-identical across worker counts.
    std::string to_table(bool with_timing = true) const;
};

/// E[E_t^lambda] against Gamma(lambda+1)/Gamma(lambda*beta+1) * t^(lambda*beta),
/// one sample, several moment orders, 3-sigma gate.
PropertyCheck verify_moments(const InverseSample& sample, const std::vector<double>& lambdas);

/// Same gate across a (lambda, t) table with freshly drawn samples; t = 0
/// rows compare exact zeros.
PropertyCheck verify_moments(const FractionalOrder& beta, const std::vector<double>& lambdas,
                             const std::vector<double>& times, std::size_t n, std::uint64_t seed,
                             int workers = 0);

/// Kolmogorov-Smirnov distance between an inverse-process sample and the CDF
/// obtained by integrating inverse_pdf from zero (cumulative trapezoid on a
/// fine uniform grid whose span captures all but 1e-6 of the mass).
PropertyCheck verify_distribution(const InverseSample& sample, double ks_tol);

/// |u(x,t) - u(y,t)| <= C * max of sqrt(L) at the two directed section
/// displacements scaled by 1/t, every evaluated pair, every time node.
PropertyCheck verify_spatial_modulus(const ValueField& field, const QuotientModel& model,
                                     const LagrangianPair& pair, double growth_c);

/// u(x,.) non-increasing: pathwise violation counter must be zero and every
/// mean-level increase must sit inside 3 RSS standard errors. The exact t = 0
/// row participates.
PropertyCheck verify_monotonicity(const ValueField& field);

/// Power-law modulus in time with alternating gap-class holdout: classes of
/// |t_b - t_a| at even positions fit a power law, odd positions must stay
/// under headroom * prediction + 3 standard errors.
PropertyCheck verify_time_holder(const ValueField& field, double headroom);

/// max_x |u(.,t) - g| against c * t^beta: log-log slope within
/// slope_tol of beta, and the envelope bound holds at every node within
/// 3 standard errors.
PropertyCheck verify_initial_layer(const ValueField& field, double c_bound, double slope_tol);

/// u(x,t) <= min_y [ C*(E_t-E_s)*sqrt(L)((f(x)-f(y))/(E_t-E_s)) + u(y,s) ]
/// for index pairs (s,t); quadratic Lagrangians make the cost
/// path-independent: C*|f(x)-f(y)|/sqrt(2).
PropertyCheck verify_dpp(const ValueField& field, const QuotientModel& model,
                         const LagrangianPair& pair, double growth_c,
                         const std::vector<std::pair<std::size_t, std::size_t>>& index_pairs);

/// Discrete subsolution residual: L1 Caputo derivative of u(x,.) plus
/// max over grid controls q of Du.q - C*sqrt(L)(f(q)), checked against a
/// budget of MC noise, gradient noise band, and an L1 truncation estimate.
/// Cells with invalid gradients are excluded and reported; more than
/// max_excluded_fraction excluded flips the verdict to inconclusive.
PropertyCheck verify_subsolution(const ValueField& field, const QuotientModel& model,
                                 const LagrangianPair& pair, double growth_c,
                                 double max_excluded_fraction);

} // namespace fhl
