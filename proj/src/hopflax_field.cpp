#include "fhl/hopflax_field.hpp"

#include "fhl/common.hpp"
#include "fhl/rng.hpp"
#include "fhl/stable_process.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fhl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTinyE = 1e-300;
constexpr std::size_t kBlock = 1024;

/// Dense minimisation data: evaluated x rows against the full fibre grid.
/// sqd holds squared displacement norms (quadratic pair), disp the signed
/// scalar displacement (tabulated pair, scalar ambient space).
struct Problem {
    std::size_t nx = 0;
    std::size_t nz = 0;
    std::size_t base_dim = 1;
    bool quadratic = true;
    std::vector<double> x_points;
    std::vector<std::size_t> x_index;
    std::vector<double> sqd;
    std::vector<double> disp;
    std::vector<double> g;
    std::vector<double> g_row;
};

std::vector<std::size_t> strided_indices(std::size_t n, std::size_t stride) {
    if (n == 0) throw std::invalid_argument("empty base grid");
    if (stride == 0) throw std::invalid_argument("x_stride must be positive");
    if (stride > 1 && (n - 1) % stride != 0)
        throw std::invalid_argument("x_stride must divide point count minus one");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
    return idx;
}

Problem build_problem(const QuotientModel& model, const LagrangianPair& pair,
                      std::size_t stride) {
    Problem p;
    p.base_dim = model.base_dim;
    p.quadratic = pair.is_quadratic();
    if (!p.quadratic && model.ambient_dim != 1)
        throw std::invalid_argument("tabulated Lagrangians need a scalar ambient space");
    p.nz = model.n_points();
    p.x_index = strided_indices(p.nz, stride);
    p.nx = p.x_index.size();
    p.g = model.g_values;
    p.x_points.reserve(p.nx * p.base_dim);
    p.g_row.reserve(p.nx);
    auto& dist = p.quadratic ? p.sqd : p.disp;
    dist.resize(p.nx * p.nz);
    for (std::size_t r = 0; r < p.nx; ++r) {
        const std::size_t i = p.x_index[r];
        auto bp = model.base_point(i);
        p.x_points.insert(p.x_points.end(), bp.begin(), bp.end());
        p.g_row.push_back(model.g_values[i]);
        auto fx = model.section_value(i);
        for (std::size_t j = 0; j < p.nz; ++j) {
            FiberPoint fp;
            try {
                fp = model.fiber_nearest(fx, j);
            } catch (const std::exception& e) {
                throw NumericalError(std::string("fiber oracle failed: ") + e.what());
            }
            if (!std::isfinite(fp.distance) || fp.distance < 0.0)
                throw NumericalError("fiber oracle returned an invalid distance");
            if (p.quadratic) {
                dist[r * p.nz + j] = fp.distance * fp.distance;
            } else {
                if (fp.point.size() != 1)
                    throw NumericalError("fiber oracle dimension mismatch");
                dist[r * p.nz + j] = fx[0] - fp.point[0];
            }
        }
    }
    return p;
}

Problem build_problem(const GridFunction& g, const LagrangianPair& pair, std::size_t stride) {
    Problem p;
    p.base_dim = 1;
    p.quadratic = pair.is_quadratic();
    const auto& pts = g.points();
    const auto& vals = g.values();
    p.nz = pts.size();
    bool any_finite = false;
    for (double v : vals) any_finite = any_finite || std::isfinite(v);
    if (!any_finite) throw std::invalid_argument("terminal datum is identically infinite");
    p.x_index = strided_indices(p.nz, stride);
    p.nx = p.x_index.size();
    p.g = vals;
    auto& dist = p.quadratic ? p.sqd : p.disp;
    dist.resize(p.nx * p.nz);
    for (std::size_t r = 0; r < p.nx; ++r) {
        const double x = pts[p.x_index[r]];
        p.x_points.push_back(x);
        p.g_row.push_back(vals[p.x_index[r]]);
        for (std::size_t j = 0; j < p.nz; ++j) {
            const double w = x - pts[j];
            dist[r * p.nz + j] = p.quadratic ? w * w : w;
        }
    }
    return p;
}

void validate_config(const EvaluationConfig& cfg) {
    if (cfg.n_paths < 2) throw std::invalid_argument("n_paths must be at least 2");
    if (cfg.time_grid.empty()) throw std::invalid_argument("time_grid must be non-empty");
    double prev = 0.0;
    for (double t : cfg.time_grid) {
        if (!std::isfinite(t) || t <= prev)
            throw std::invalid_argument("time_grid must be strictly increasing and positive");
        prev = t;
    }
    if (cfg.workers < 0) throw std::invalid_argument("workers must be non-negative");
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

struct BlockSums {
    std::vector<double> s1, s2, cn, cs;   // n_blocks * ncells
    std::vector<std::uint64_t> count;     // n_blocks * nt
};

ValueField evaluate_core(const Problem& p, const LagrangianPair& pair,
                         const EvaluationConfig& cfg) {
    validate_config(cfg);
    const std::size_t nx = p.nx, nz = p.nz, nt = cfg.time_grid.size();
    const std::size_t ncells = nx * nt;
    const std::size_t n = cfg.n_paths;
    const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
    const double beta = cfg.beta.value();

    BlockSums acc;
    acc.s1.assign(n_blocks * ncells, 0.0);
    acc.s2.assign(n_blocks * ncells, 0.0);
    acc.cn.assign(n_blocks * ncells, 0.0);
    acc.cs.assign(n_blocks * ncells, 0.0);
    acc.count.assign(n_blocks * nt, 0);

    const int workers = resolve_workers(cfg.workers);
    std::atomic<std::size_t> next_block{0};
    std::atomic<bool> diverged{false};
    std::vector<std::vector<std::uint32_t>> argc(static_cast<std::size_t>(workers));
    std::vector<std::uint64_t> mono_local(static_cast<std::size_t>(workers), 0);

    auto body = [&](int w) {
        auto& counts = argc[static_cast<std::size_t>(w)];
        counts.assign(ncells * nz, 0);
        std::uint64_t mono = 0;
        std::vector<double> vals(nx), prev(nx);
        for (;;) {
            const std::size_t b = next_block.fetch_add(1);
            if (b >= n_blocks) break;
            double* s1 = acc.s1.data() + b * ncells;
            double* s2 = acc.s2.data() + b * ncells;
            double* cn = acc.cn.data() + b * ncells;
            double* cs = acc.cs.data() + b * ncells;
            std::uint64_t* cnt = acc.count.data() + b * nt;
            const std::size_t lo = b * kBlock;
            const std::size_t hi = std::min(n, lo + kBlock);
            for (std::size_t path = lo; path < hi; ++path) {
                PathRng rng(cfg.seed, path);
                const double u1 = rng.next_open01();
                const double u2 = rng.next_open01();
                const double d = kanter_draw(cfg.beta, u1, u2);
                bool have_prev = false;
                for (std::size_t ti = 0; ti < nt; ++ti) {
                    const double t = cfg.time_grid[ti];
                    if (cfg.condition_et_ge_1 && d > t) continue;
                    const double e = std::pow(t / d, beta);
                    for (std::size_t xi = 0; xi < nx; ++xi) {
                        int arg = -1;
                        const double* sq = p.quadratic ? p.sqd.data() + xi * nz : nullptr;
                        const double* dp = p.quadratic ? nullptr : p.disp.data() + xi * nz;
                        const double v = inner_min_value(
                            pair, {sq, p.quadratic ? nz : 0}, {dp, p.quadratic ? 0 : nz},
                            p.g, e, arg);
                        vals[xi] = v;
                        if (!std::isfinite(v)) {
                            diverged.store(true);
                            continue;
                        }
                        const std::size_t cell = xi * nt + ti;
                        s1[cell] += v;
                        s2[cell] += v * v;
                        counts[cell * nz + static_cast<std::size_t>(arg)] += 1;
                    }
                    for (std::size_t xi = 0; xi + 1 < nx; ++xi)
                        cn[xi * nt + ti] += vals[xi] * vals[xi + 1];
                    for (std::size_t xi = 0; xi + 2 < nx; ++xi)
                        cs[xi * nt + ti] += vals[xi] * vals[xi + 2];
                    cnt[ti] += 1;
                    if (!cfg.condition_et_ge_1) {
                        if (have_prev) {
                            for (std::size_t xi = 0; xi < nx; ++xi)
                                if (vals[xi] > prev[xi] + 1e-9 * (1.0 + std::fabs(prev[xi])))
                                    ++mono;
                        }
                        prev = vals;
                        have_prev = true;
                    }
                }
            }
        }
        mono_local[static_cast<std::size_t>(w)] = mono;
    };

    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(body, w);
        for (auto& th : pool) th.join();
    }
    if (diverged.load())
        throw NumericalError("value diverged: vanishing clock with no zero-displacement candidate");

    ValueField f;
    f.beta = beta;
    f.seed = cfg.seed;
    f.n_paths = n;
    f.conditioned = cfg.condition_et_ge_1;
    f.base_dim = p.base_dim;
    f.x_points = p.x_points;
    f.x_index = p.x_index;
    f.time_grid = cfg.time_grid;
    f.g_row = p.g_row;
    f.u.assign(ncells, 0.0);
    f.se.assign(ncells, 0.0);
    f.argmin.assign(ncells, 0);
    f.cov_near.assign(ncells, 0.0);
    f.cov_skip.assign(ncells, 0.0);
    f.acceptance.assign(nt, 0.0);
    f.accepted.assign(nt, 0);
    for (std::uint64_t m : mono_local) f.monotonicity_violations += m;

    // Fixed block order keeps every reduced float identical across worker counts.
    std::vector<double> s1(ncells, 0.0), s2(ncells, 0.0), cn(ncells, 0.0), cs(ncells, 0.0);
    std::vector<std::uint64_t> cnt(nt, 0);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        for (std::size_t c = 0; c < ncells; ++c) {
            s1[c] += acc.s1[b * ncells + c];
            s2[c] += acc.s2[b * ncells + c];
            cn[c] += acc.cn[b * ncells + c];
            cs[c] += acc.cs[b * ncells + c];
        }
        for (std::size_t ti = 0; ti < nt; ++ti) cnt[ti] += acc.count[b * nt + ti];
    }
    for (std::size_t ti = 0; ti < nt; ++ti) {
        if (cnt[ti] == 0)
            throw NumericalError("all paths rejected at t = " + std::to_string(cfg.time_grid[ti]));
        f.accepted[ti] = static_cast<std::size_t>(cnt[ti]);
        f.acceptance[ti] = static_cast<double>(cnt[ti]) / static_cast<double>(n);
    }
    for (std::size_t xi = 0; xi < nx; ++xi) {
        for (std::size_t ti = 0; ti < nt; ++ti) {
            const std::size_t cell = xi * nt + ti;
            const double m = static_cast<double>(cnt[ti]);
            const double mean = s1[cell] / m;
            f.u[cell] = mean;
            if (m < 2.0) {
                f.se[cell] = kInf;
            } else {
                const double var = std::max(0.0, (s2[cell] - s1[cell] * s1[cell] / m) / (m - 1.0));
                f.se[cell] = std::sqrt(var / m);
            }
            if (xi + 1 < nx && m >= 2.0) {
                const std::size_t r = (xi + 1) * nt + ti;
                f.cov_near[cell] = (cn[cell] - s1[cell] * s1[r] / m) / (m - 1.0) / m;
            }
            if (xi + 2 < nx && m >= 2.0) {
                const std::size_t r = (xi + 2) * nt + ti;
                f.cov_skip[cell] = (cs[cell] - s1[cell] * s1[r] / m) / (m - 1.0) / m;
            }
        }
    }
    // Modal argmin, merged across workers; ties resolve to the smallest index.
    std::vector<std::uint64_t> merged(nz);
    for (std::size_t cell = 0; cell < ncells; ++cell) {
        std::fill(merged.begin(), merged.end(), 0);
        for (const auto& counts : argc)
            for (std::size_t j = 0; j < nz; ++j) merged[j] += counts[cell * nz + j];
        std::size_t best = 0;
        for (std::size_t j = 1; j < nz; ++j)
            if (merged[j] > merged[best]) best = j;
        f.argmin[cell] = static_cast<int>(best);
    }
    return f;
}

} // namespace

double inner_min_value(const LagrangianPair& pair, std::span<const double> sq_dist,
                       std::span<const double> displacement, std::span<const double> g, double E,
                       int& argmin_index) {
    const bool quad = !sq_dist.empty();
    const std::size_t nz = g.size();
    double best = kInf;
    argmin_index = -1;
    if (E < kTinyE) {
        for (std::size_t j = 0; j < nz; ++j) {
            const double w = quad ? sq_dist[j] : displacement[j];
            if (w != 0.0) continue;
            if (g[j] < best) {
                best = g[j];
                argmin_index = static_cast<int>(j);
            }
        }
        return best;
    }
    const double inv2e = 0.5 / E;
    for (std::size_t j = 0; j < nz; ++j) {
        double v;
        if (quad) {
            v = sq_dist[j] * inv2e + g[j];
        } else {
            const double w = displacement[j];
            v = pair.perspective(E, {&w, 1}) + g[j];
        }
        if (v < best) {
            best = v;
            argmin_index = static_cast<int>(j);
        }
    }
    return best;
}

ValueField evaluate_u(const QuotientModel& model, const LagrangianPair& pair,
                      const EvaluationConfig& cfg) {
    return evaluate_core(build_problem(model, pair, cfg.x_stride), pair, cfg);
}

ValueField evaluate_classical_v(const GridFunction& g, const LagrangianPair& pair,
                                const EvaluationConfig& cfg) {
    return evaluate_core(build_problem(g, pair, cfg.x_stride), pair, cfg);
}

std::vector<double> evaluate_deterministic_u(const QuotientModel& model,
                                             const LagrangianPair& pair,
                                             const std::vector<double>& time_grid,
                                             std::size_t x_stride) {
    const Problem p = build_problem(model, pair, x_stride);
    std::vector<double> out(p.nx * time_grid.size());
    for (std::size_t xi = 0; xi < p.nx; ++xi) {
        for (std::size_t ti = 0; ti < time_grid.size(); ++ti) {
            const double t = time_grid[ti];
            if (!(t > 0.0)) throw std::invalid_argument("time grid must be positive");
            int arg = -1;
            const double* sq = p.quadratic ? p.sqd.data() + xi * p.nz : nullptr;
            const double* dp = p.quadratic ? nullptr : p.disp.data() + xi * p.nz;
            out[xi * time_grid.size() + ti] = inner_min_value(
                pair, {sq, p.quadratic ? p.nz : 0}, {dp, p.quadratic ? 0 : p.nz}, p.g, t, arg);
        }
    }
    return out;
}

GradientResult gradient_Du(const ValueField& field, std::size_t x_index, std::size_t t_index) {
    if (field.base_dim != 1)
        throw std::invalid_argument("gradients need a one-dimensional base space");
    const std::size_t nx = field.nx(), nt = field.nt();
    if (nx < 3) throw std::invalid_argument("gradients need at least three x points");
    if (x_index == 0 || x_index + 1 >= nx)
        throw std::invalid_argument("gradient x index must be interior");
    if (t_index >= nt) throw std::invalid_argument("gradient t index out of range");
    const double h = field.x_points[1] - field.x_points[0];
    for (std::size_t i = 0; i + 1 < nx; ++i) {
        const double step = field.x_points[i + 1] - field.x_points[i];
        if (std::fabs(step - h) > 1e-9 * std::max(std::fabs(h), 1.0))
            throw std::invalid_argument("gradients need a uniform x grid");
    }
    const std::size_t cm = (x_index - 1) * nt + t_index;
    const std::size_t c0 = x_index * nt + t_index;
    const std::size_t cp = (x_index + 1) * nt + t_index;
    const double um = field.u[cm], u0 = field.u[c0], up = field.u[cp];
    const double sem = field.se[cm], se0 = field.se[c0], sep = field.se[cp];
    GradientResult r;
    r.value = (up - um) / (2.0 * h);
    const double var_c = sep * sep + sem * sem - 2.0 * field.cov_skip[cm];
    r.noise = std::sqrt(std::max(0.0, var_c)) / (2.0 * h);
    // One-sided slopes must agree within 5x their combined per-cell noise.
    // Deliberately ignores the shared-path covariance: under common random
    // numbers the honest variance of the second difference collapses, and a
    // differentiability proxy that resolves faint smooth curvature as a kink
    // is useless.
    const double var2 = sem * sem + 4.0 * se0 * se0 + sep * sep;
    const double second = std::fabs(up - 2.0 * u0 + um) / h;
    const double noise2 = std::sqrt(var2) / h;
    r.valid = second <= 5.0 * noise2 + 1e-9 * (1.0 + std::fabs(r.value));
    return r;
}

} // namespace fhl
