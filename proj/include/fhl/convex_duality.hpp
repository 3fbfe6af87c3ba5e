#pragma once

#include "fhl/grid_function.hpp"

#include <span>
#include <vector>

namespace fhl {

struct ConjugateResult {
    GridFunction function;
    /// Per dual point: the maximiser sat on the first or last finite grid
    /// point, so the conjugate value there is a truncation artefact.
    std::vector<bool> boundary_maximizer;
};

/// Discrete Legendre transform g(q) = max_p (p*q - f(p)) over the tabulated
/// grid of f, skipping +inf entries.
ConjugateResult legendre_transform(const GridFunction& f, std::span<const double> dual_points);

struct ConvexityReport {
    bool convex = false;
    /// Truncated-grid proxy: chord slopes still strictly growing at both ends.
    bool superlinear = false;
    double worst_slope_drop = 0.0;
    double left_boundary_slope = 0.0;
    double right_boundary_slope = 0.0;
};

ConvexityReport check_convex_superlinear(const GridFunction& f);

/// A Lagrangian L and its conjugate Hamiltonian H. The quadratic pair
/// L(v)=|v|^2/2, H(p)=|p|^2/2 carries closed forms valid in any dimension;
/// tabulated pairs are one-dimensional.
class LagrangianPair {
public:
    static LagrangianPair quadratic(double growth_constant);
    static LagrangianPair from_tabulated(const GridFunction& L, std::span<const double> dual_points,
                                         double growth_constant);

    bool is_quadratic() const { return quadratic_; }
    double growth_constant() const { return growth_constant_; }
    const GridFunction& lagrangian() const { return L_; }
    const GridFunction& hamiltonian() const { return H_; }

    /// L(v); +inf outside the tabulated domain.
    double eval_L(std::span<const double> v) const;
    /// sqrt(L(v)); signals a negative tabulated Lagrangian value.
    double sqrt_L(std::span<const double> v) const;
    /// E * L(v / E) with the E -> 0 limit taken along zero displacement.
    double perspective(double E, std::span<const double> v) const;

private:
    LagrangianPair(bool quadratic, double growth_constant, GridFunction L, GridFunction H);

    bool quadratic_;
    double growth_constant_;
    GridFunction L_;
    GridFunction H_;
};

} // namespace fhl
