#pragma once

#include "fhl/convex_duality.hpp"
#include "fhl/fractional_order.hpp"
#include "fhl/intrinsic_geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fhl {

struct EvaluationConfig {
    explicit EvaluationConfig(FractionalOrder b) : beta(b) {}

    FractionalOrder beta;
    std::size_t n_paths = 100000;
    std::uint64_t seed = 0;
    /// Strictly increasing, strictly positive; t = 0 is the exact boundary
    /// row and is never sampled.
    std::vector<double> time_grid;
    /// Conditional expectation over {E_t >= 1} via rejection filtering.
    bool condition_et_ge_1 = false;
    /// Evaluate u on every stride-th base point (the inner minimisation
    /// always scans the full grid). (count-1) must be divisible by stride.
    std::size_t x_stride = 1;
    int workers = 0;
};

/// Monte Carlo estimate of u on (evaluated base points) x (time grid),
/// x-major storage. One stable draw per path is shared by the whole time
/// grid, so each path's value is non-increasing in t for admissible
/// Lagrangians (monotone coupling).
struct ValueField {
    double beta = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    bool conditioned = false;

    std::size_t base_dim = 0;
    std::vector<double> x_points;       // nx * base_dim
    std::vector<std::size_t> x_index;   // indices into the source grid
    std::vector<double> time_grid;      // nt
    std::vector<double> g_row;          // nx, exact values at t = 0

    std::vector<double> u;              // nx * nt
    std::vector<double> se;             // nx * nt, stderr of the mean
    std::vector<int> argmin;            // nx * nt, modal inner argmin (ties: smallest)
    /// Covariances of the cell means with the next / next-next x neighbour,
    /// needed to size finite-difference noise under common random numbers.
    std::vector<double> cov_near;       // nx * nt (last x row unused)
    std::vector<double> cov_skip;       // nx * nt (last two x rows unused)

    std::vector<double> acceptance;     // nt, fraction of paths kept
    std::vector<std::size_t> accepted;  // nt
    std::size_t monotonicity_violations = 0;  // pathwise count, unconditioned runs only

    std::size_t nx() const { return g_row.size(); }
    std::size_t nt() const { return time_grid.size(); }
    double u_at(std::size_t xi, std::size_t ti) const { return u[xi * nt() + ti]; }
    double se_at(std::size_t xi, std::size_t ti) const { return se[xi * nt() + ti]; }
    std::span<const double> x_point(std::size_t xi) const {
        return {x_points.data() + xi * base_dim, base_dim};
    }
};

/// Inner minimisation for one path: min_j E*L(w_j/E) + g_j. The E -> 0
/// limit admits only zero-displacement candidates; ties resolve to the
/// smallest index. For the quadratic pair sq_dist carries |w_j|^2,
/// otherwise displacement carries the scalar w_j.
double inner_min_value(const LagrangianPair& pair, std::span<const double> sq_dist,
                       std::span<const double> displacement, std::span<const double> g, double E,
                       int& argmin_index);

/// Intrinsic value function over a quotient model.
ValueField evaluate_u(const QuotientModel& model, const LagrangianPair& pair,
                      const EvaluationConfig& cfg);

/// Classical baseline: same algorithm on a Euclidean grid with arbitrary
/// terminal datum g (finite values required).
ValueField evaluate_classical_v(const GridFunction& g, const LagrangianPair& pair,
                                const EvaluationConfig& cfg);

/// First-passage limit comparator: E_t replaced by t (nx * nt values).
std::vector<double> evaluate_deterministic_u(const QuotientModel& model,
                                             const LagrangianPair& pair,
                                             const std::vector<double>& time_grid,
                                             std::size_t x_stride = 1);

struct GradientResult {
    double value = 0.0;   // central difference
    double noise = 0.0;   // stderr of the central difference
    bool valid = false;   // one-sided differences agree within 5x their noise
};

/// Central finite difference of u(., t) on a uniform 1-D evaluated grid;
/// x_index must be interior.
GradientResult gradient_Du(const ValueField& field, std::size_t x_index, std::size_t t_index);

} // namespace fhl
