#pragma once

#include "fhl/convex_duality.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fhl {

/// Nearest point of a fibre together with the distance to it.
struct FiberPoint {
    std::vector<double> point;
    double distance = 0.0;
};

/// A quotient structure over a finite base grid Y: a section f into the
/// ambient space, the terminal datum g(y) = max_j f_j(y), and an oracle
/// returning the ambient nearest point of each fibre.
struct QuotientModel {
    std::string kind;  // "identity", "hyperplane" or "custom"
    std::size_t base_dim = 0;
    std::size_t ambient_dim = 0;
    std::vector<double> base_points;     // n x base_dim, row-major
    std::vector<double> section_values;  // n x ambient_dim, row-major
    std::vector<double> g_values;        // n
    std::function<FiberPoint(std::span<const double>, std::size_t)> fiber_nearest;

    std::size_t n_points() const { return g_values.size(); }
    std::span<const double> base_point(std::size_t i) const {
        return {base_points.data() + i * base_dim, base_dim};
    }
    std::span<const double> section_value(std::size_t i) const {
        return {section_values.data() + i * ambient_dim, ambient_dim};
    }
};

/// Section map for hyperplane quotients; must satisfy sum(f(y)) = y.
using SectionFn = std::function<std::vector<double>(double)>;

/// Trivial quotient: ambient = base, singleton fibres, f = identity.
QuotientModel build_identity_quotient(std::vector<double> points, std::size_t dim);
QuotientModel build_identity_quotient(std::vector<double> points_1d);

/// Quotient of R^kappa (kappa even) by the hyperplane {sum x_i = 0}: the
/// fibre over z is {sum x_i = z}, nearest point p + ((z - sum p)/kappa) * 1.
/// The default section is f(y) = (y, 0, ..., 0).
QuotientModel build_hyperplane_quotient(std::size_t ambient_dim, double y_lo, double y_hi,
                                        std::size_t count, SectionFn section = {});

/// Paired-coordinate section (y + a1*sin y, -a1*sin y, a2*y, -a2*y, ...):
/// the first pair carries y, later pairs cancel, so the sum is always y.
SectionFn make_paired_section(std::span<const double> a_coeffs);

/// K = sup over base pairs of d(f(y1), fibre(y2)).
double estimate_K(const QuotientModel& model);

/// Smallest constant with d(f(y1), f(y2)) <= ell * d(f(y1), fibre(y2)) over
/// the grid; at least 1 by definition, +inf when fibres collapse.
double estimate_intrinsic_lipschitz(const QuotientModel& model);

struct IntrinsicConstants {
    double K = 0.0;
    double ell = 1.0;
    double C = 0.0;
};

struct DerivedGrowth {
    double value = 0.0;
    bool degenerate = false;  // K == 0: every section point lies on every fibre
};

/// C = sqrt(2) * K, valid for the quadratic Lagrangian only.
DerivedGrowth derive_C(double K, const LagrangianPair& pair);

struct SublinearityReport {
    std::size_t trials = 0;
    /// min over trials of RHS + projection slack - LHS; negative means the
    /// sampled triple genuinely violates the sublinearity inequality.
    double worst_margin = 0.0;
    double worst_lhs = 0.0;
    double worst_rhs = 0.0;
    bool holds = true;
};

/// Samples (x, q, lambda) triples and measures sqrt(L((f(x)-f(y))/lambda))
/// against sqrt(L(f(q))) with y the grid projection of x - lambda*q. For
/// nonlinear sections this is a measurement, not an assertion.
SublinearityReport check_sublinearity(const QuotientModel& model, const LagrangianPair& pair,
                                      std::size_t trials, std::uint64_t seed);

} // namespace fhl
