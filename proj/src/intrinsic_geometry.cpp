#include "fhl/intrinsic_geometry.hpp"

#include "fhl/common.hpp"
#include "fhl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fhl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (const double c : v) s += c * c;
    return std::sqrt(s);
}

void fill_g_from_section(QuotientModel& m) {
    const std::size_t n = m.base_points.size() / m.base_dim;
    m.g_values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best = -kInf;
        for (std::size_t c = 0; c < m.ambient_dim; ++c) {
            best = std::max(best, m.section_values[i * m.ambient_dim + c]);
        }
        m.g_values[i] = best;
    }
}

void check_section_on_fibers(const QuotientModel& m) {
    for (std::size_t i = 0; i < m.n_points(); ++i) {
        const FiberPoint fp = m.fiber_nearest(m.section_value(i), i);
        if (!(fp.distance <= 1e-9 * (1.0 + norm2(m.section_value(i))))) {
            throw std::invalid_argument("section does not land on its own fibre at index " +
                                        std::to_string(i));
        }
    }
}

} // namespace

QuotientModel build_identity_quotient(std::vector<double> points, std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("dimension must be positive");
    if (points.empty() || points.size() % dim != 0) {
        throw std::invalid_argument("point array length must be a positive multiple of dim");
    }
    QuotientModel m;
    m.kind = "identity";
    m.base_dim = dim;
    m.ambient_dim = dim;
    m.base_points = points;
    m.section_values = std::move(points);
    const std::size_t n = m.base_points.size() / dim;
    std::vector<double> base = m.base_points;  // owned copy for the closure
    m.fiber_nearest = [base, dim](std::span<const double> p, std::size_t j) {
        if (p.size() != dim) throw std::invalid_argument("fibre query dimension mismatch");
        FiberPoint fp;
        fp.point.assign(base.begin() + j * dim, base.begin() + (j + 1) * dim);
        double s = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double d = p[c] - fp.point[c];
            s += d * d;
        }
        fp.distance = std::sqrt(s);
        return fp;
    };
    fill_g_from_section(m);
    (void)n;
    check_section_on_fibers(m);
    return m;
}

QuotientModel build_identity_quotient(std::vector<double> points_1d) {
    return build_identity_quotient(std::move(points_1d), 1);
}

SectionFn make_paired_section(std::span<const double> a_coeffs) {
    std::vector<double> a(a_coeffs.begin(), a_coeffs.end());
    if (a.empty()) throw std::invalid_argument("paired section needs at least one coefficient");
    return [a](double y) {
        std::vector<double> f(2 * a.size());
        f[0] = y + a[0] * std::sin(y);
        f[1] = -a[0] * std::sin(y);
        for (std::size_t k = 1; k < a.size(); ++k) {
            f[2 * k] = a[k] * y;
            f[2 * k + 1] = -a[k] * y;
        }
        return f;
    };
}

QuotientModel build_hyperplane_quotient(std::size_t ambient_dim, double y_lo, double y_hi,
                                        std::size_t count, SectionFn section) {
    if (ambient_dim == 0 || ambient_dim % 2 != 0) {
        throw std::invalid_argument("ambient dimension must be even and positive");
    }
    if (count < 1) throw std::invalid_argument("base grid needs at least one point");
    if (count > 1 && !(y_hi > y_lo)) throw std::invalid_argument("base range needs hi > lo");

    QuotientModel m;
    m.kind = "hyperplane";
    m.base_dim = 1;
    m.ambient_dim = ambient_dim;
    m.base_points.resize(count);
    if (count == 1) {
        m.base_points[0] = y_lo;
    } else {
        const double h = (y_hi - y_lo) / double(count - 1);
        for (std::size_t i = 0; i < count; ++i) m.base_points[i] = y_lo + double(i) * h;
        m.base_points.back() = y_hi;
    }

    m.section_values.resize(count * ambient_dim, 0.0);
    for (std::size_t i = 0; i < count; ++i) {
        const double y = m.base_points[i];
        if (section) {
            const std::vector<double> f = section(y);
            if (f.size() != ambient_dim) {
                throw std::invalid_argument("section value dimension mismatch");
            }
            double sum = 0.0;
            for (const double c : f) sum += c;
            if (std::fabs(sum - y) > 1e-9 * (1.0 + std::fabs(y))) {
                throw std::invalid_argument("section coordinates must sum to y");
            }
            std::copy(f.begin(), f.end(), m.section_values.begin() + i * ambient_dim);
        } else {
            m.section_values[i * ambient_dim] = y;
        }
    }

    const std::vector<double> zs = m.base_points;
    const double kappa = double(ambient_dim);
    m.fiber_nearest = [zs, ambient_dim, kappa](std::span<const double> p, std::size_t j) {
        if (p.size() != ambient_dim) throw std::invalid_argument("fibre query dimension mismatch");
        double sum = 0.0;
        for (const double c : p) sum += c;
        const double shift = (zs[j] - sum) / kappa;
        FiberPoint fp;
        fp.point.resize(ambient_dim);
        for (std::size_t c = 0; c < ambient_dim; ++c) fp.point[c] = p[c] + shift;
        fp.distance = std::fabs(sum - zs[j]) / std::sqrt(kappa);
        return fp;
    };
    fill_g_from_section(m);
    check_section_on_fibers(m);
    return m;
}

double estimate_K(const QuotientModel& model) {
    double K = 0.0;
    for (std::size_t i = 0; i < model.n_points(); ++i) {
        for (std::size_t j = 0; j < model.n_points(); ++j) {
            K = std::max(K, model.fiber_nearest(model.section_value(i), j).distance);
        }
    }
    return K;
}

double estimate_intrinsic_lipschitz(const QuotientModel& model) {
    double ell = 1.0;
    for (std::size_t i = 0; i < model.n_points(); ++i) {
        for (std::size_t j = 0; j < model.n_points(); ++j) {
            if (i == j) continue;
            const double dist = model.fiber_nearest(model.section_value(i), j).distance;
            double num = 0.0;
            for (std::size_t c = 0; c < model.ambient_dim; ++c) {
                const double d = model.section_values[i * model.ambient_dim + c] -
                                 model.section_values[j * model.ambient_dim + c];
                num += d * d;
            }
            num = std::sqrt(num);
            if (dist <= 1e-14 * (1.0 + num)) {
                if (num > 1e-12) return kInf;  // distinct section points on one fibre
                continue;
            }
            ell = std::max(ell, num / dist);
        }
    }
    return ell;
}

DerivedGrowth derive_C(double K, const LagrangianPair& pair) {
    if (!pair.is_quadratic()) {
        throw std::invalid_argument(
            "C = sqrt(2)K is specific to the quadratic Lagrangian; supply C explicitly");
    }
    if (!(K >= 0.0)) throw std::invalid_argument("K must be >= 0");
    return {std::sqrt(2.0) * K, K == 0.0};
}

SublinearityReport check_sublinearity(const QuotientModel& model, const LagrangianPair& pair,
                                      std::size_t trials, std::uint64_t seed) {
    if (trials == 0) throw std::invalid_argument("need at least one trial");
    const std::size_t n = model.n_points();
    const std::size_t d = model.base_dim;

    SublinearityReport rep;
    rep.trials = trials;
    rep.worst_margin = kInf;

    std::vector<double> target(d), disp(model.ambient_dim), proj_slack(d);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        PathRng rng(seed, trial);
        const std::size_t xi = std::min(n - 1, std::size_t(rng.next_open01() * double(n)));
        const std::size_t qi = std::min(n - 1, std::size_t(rng.next_open01() * double(n)));
        const double lambda = 0.05 + 1.95 * rng.next_open01();

        for (std::size_t c = 0; c < d; ++c) {
            target[c] = model.base_point(xi)[c] - lambda * model.base_point(qi)[c];
        }
        // Grid projection of x - lambda q.
        std::size_t yi = 0;
        double best = kInf;
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double dd = target[c] - model.base_point(j)[c];
                s += dd * dd;
            }
            if (s < best) {
                best = s;
                yi = j;
            }
        }

        for (std::size_t c = 0; c < model.ambient_dim; ++c) {
            disp[c] = (model.section_values[xi * model.ambient_dim + c] -
                       model.section_values[yi * model.ambient_dim + c]) /
                      lambda;
        }
        const double lhs = pair.sqrt_L(disp);
        const double rhs = pair.sqrt_L(model.section_value(qi));
        // Projection slack: moving y off x - lambda q costs at most
        // sqrt(L(delta / lambda)) for the quadratic-type bound.
        for (std::size_t c = 0; c < d; ++c) {
            proj_slack[c] = (target[c] - model.base_point(yi)[c]) / lambda;
        }
        double slack = 0.0;
        if (pair.is_quadratic()) {
            slack = pair.sqrt_L(proj_slack);
        } else if (d == 1) {
            const double v = pair.sqrt_L(proj_slack);
            slack = std::isfinite(v) ? v : 0.0;
        }
        const double margin = rhs + slack - lhs;
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_lhs = lhs;
            rep.worst_rhs = rhs;
        }
    }
    rep.holds = rep.worst_margin >= -1e-9 * (1.0 + std::fabs(rep.worst_rhs));
    return rep;
}

} // namespace fhl
