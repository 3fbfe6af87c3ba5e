#include "fhl/convex_duality.hpp"

#include "fhl/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fhl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

ConjugateResult legendre_transform(const GridFunction& f, std::span<const double> dual_points) {
    if (f.size() < 2) throw std::invalid_argument("conjugate input needs at least two points");
    if (dual_points.empty()) throw std::invalid_argument("dual grid is empty");
    for (std::size_t i = 1; i < dual_points.size(); ++i) {
        if (!(dual_points[i] > dual_points[i - 1])) {
            throw std::invalid_argument("dual grid must be strictly increasing");
        }
    }

    std::vector<std::size_t> finite;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.values()[i] != kInf) finite.push_back(i);
    }
    if (finite.empty()) throw std::invalid_argument("conjugate input has no finite values");

    std::vector<double> g(dual_points.size());
    std::vector<bool> boundary(dual_points.size());
    for (std::size_t k = 0; k < dual_points.size(); ++k) {
        const double q = dual_points[k];
        double best = -kInf;
        std::size_t arg = finite.front();
        for (const std::size_t i : finite) {
            const double cand = f.points()[i] * q - f.values()[i];
            if (cand > best) {
                best = cand;
                arg = i;
            }
        }
        g[k] = best;
        boundary[k] = (arg == finite.front() || arg == finite.back());
    }
    return {GridFunction(std::vector<double>(dual_points.begin(), dual_points.end()), std::move(g)),
            std::move(boundary)};
}

ConvexityReport check_convex_superlinear(const GridFunction& f) {
    if (f.size() < 3) throw std::invalid_argument("convexity check needs at least three points");

    // +inf entries are admissible only as contiguous tails (domain truncation).
    std::size_t lo = 0, hi = f.size();
    while (lo < hi && f.values()[lo] == kInf) ++lo;
    while (hi > lo && f.values()[hi - 1] == kInf) --hi;
    ConvexityReport rep;
    for (std::size_t i = lo; i < hi; ++i) {
        if (f.values()[i] == kInf) return rep;  // interior hole: not convex
    }
    if (hi - lo < 3) return rep;

    std::vector<double> slope(hi - lo - 1);
    double scale = 1.0;
    for (std::size_t i = lo; i + 1 < hi; ++i) {
        slope[i - lo] = (f.values()[i + 1] - f.values()[i]) / (f.points()[i + 1] - f.points()[i]);
        scale = std::max(scale, std::fabs(slope[i - lo]));
    }
    const double tol = 1e-9 * scale;
    rep.convex = true;
    for (std::size_t i = 1; i < slope.size(); ++i) {
        const double drop = slope[i - 1] - slope[i];
        rep.worst_slope_drop = std::max(rep.worst_slope_drop, drop);
        if (drop > tol) rep.convex = false;
    }
    rep.left_boundary_slope = slope.front();
    rep.right_boundary_slope = slope.back();
    rep.superlinear = rep.convex && slope.size() >= 2 &&
                      slope[slope.size() - 1] > slope[slope.size() - 2] + tol &&
                      slope[0] < slope[1] - tol;
    return rep;
}

LagrangianPair::LagrangianPair(bool quadratic, double growth_constant, GridFunction L,
                               GridFunction H)
    : quadratic_(quadratic), growth_constant_(growth_constant), L_(std::move(L)),
      H_(std::move(H)) {}

LagrangianPair LagrangianPair::quadratic(double growth_constant) {
    if (!(growth_constant >= 0.0)) throw std::invalid_argument("growth constant must be >= 0");
    // Representative tabulations; evaluation uses the closed forms.
    const auto vgrid = make_uniform_grid(-3.0, 3.0, 61);
    const auto pgrid = make_uniform_grid(-5.0, 5.0, 101);
    std::vector<double> lv(vgrid.size()), hv(pgrid.size());
    for (std::size_t i = 0; i < vgrid.size(); ++i) lv[i] = 0.5 * vgrid[i] * vgrid[i];
    for (std::size_t i = 0; i < pgrid.size(); ++i) hv[i] = 0.5 * pgrid[i] * pgrid[i];
    return LagrangianPair(true, growth_constant, GridFunction(vgrid, std::move(lv)),
                          GridFunction(pgrid, std::move(hv)));
}

LagrangianPair LagrangianPair::from_tabulated(const GridFunction& L,
                                              std::span<const double> dual_points,
                                              double growth_constant) {
    if (!(growth_constant >= 0.0)) throw std::invalid_argument("growth constant must be >= 0");
    ConjugateResult H = legendre_transform(L, dual_points);
    // Involution screen: the double conjugate must reproduce L at interior
    // finite points, otherwise the supplied table is not convex.
    ConjugateResult back = legendre_transform(H.function, L.points());
    const double h = L.points()[1] - L.points()[0];
    const double tol = 2.0 * h * h + 1e-12;
    for (std::size_t i = 1; i + 1 < L.size(); ++i) {
        if (L.values()[i] == kInf) continue;
        if (std::fabs(back.function.values()[i] - L.values()[i]) > tol) {
            throw std::invalid_argument("tabulated Lagrangian fails the convexity screen");
        }
    }
    return LagrangianPair(false, growth_constant, L, std::move(H.function));
}

double LagrangianPair::eval_L(std::span<const double> v) const {
    if (quadratic_) {
        double s = 0.0;
        for (const double c : v) s += c * c;
        return 0.5 * s;
    }
    if (v.size() != 1) {
        throw std::invalid_argument("tabulated Lagrangians are one-dimensional");
    }
    return L_.eval(v[0]);
}

double LagrangianPair::sqrt_L(std::span<const double> v) const {
    const double value = eval_L(v);
    if (value < 0.0) {
        throw NumericalError("Lagrangian is negative at the queried point; sqrt undefined");
    }
    return std::sqrt(value);
}

double LagrangianPair::perspective(double E, std::span<const double> v) const {
    if (E < 0.0) throw std::invalid_argument("perspective needs E >= 0");
    if (E < 1e-300) {
        double norm2 = 0.0;
        for (const double c : v) norm2 += c * c;
        return norm2 == 0.0 ? 0.0 : kInf;
    }
    if (quadratic_) {
        double s = 0.0;
        for (const double c : v) s += c * c;
        return 0.5 * s / E;
    }
    if (v.size() != 1) {
        throw std::invalid_argument("tabulated Lagrangians are one-dimensional");
    }
    return E * L_.eval(v[0] / E);
}

} // namespace fhl
