#include "fhl/verification.hpp"

#include "fhl/common.hpp"
#include "fhl/fractional_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fhl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("degenerate abscissae in line fit");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

nlohmann::ordered_json budget_json(const ToleranceBudget& b) {
    return {{"mc", b.mc}, {"fd", b.fd}, {"grid", b.grid}, {"total", b.total()}};
}

std::vector<double> scaled(std::span<const double> v, double factor) {
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) x *= factor;
    return out;
}

// w_k = (k+1)^(1-beta) - k^(1-beta); mirrors the L1 kernel.
std::vector<double> l1_weights(std::size_t count, double beta) {
    std::vector<double> w(count);
    double prev = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double next = std::pow(static_cast<double>(k + 1), 1.0 - beta);
        w[k] = next - prev;
        prev = next;
    }
    return w;
}

} // namespace

const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::inconclusive: return "inconclusive";
    }
    return "unknown";
}

bool VerificationReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed()) return false;
    return true;
}

std::string VerificationReport::to_json() const {
    nlohmann::ordered_json root;
    root["all_passed"] = all_passed();
    root["constants"] = constants;
    root["config"] = config_snapshot;
    auto& arr = root["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json j;
        j["name"] = c.name;
        j["statement"] = c.statement;
        j["status"] = to_string(c.status);
        j["passed"] = c.passed();
        j["margin"] = c.margin;
        j["budget"] = budget_json(c.budget);
        j["n_points_checked"] = c.n_points_checked;
        j["details"] = c.details;
        arr.push_back(std::move(j));
    }
    return root.dump(2) + "\n";
}

std::string VerificationReport::to_table(bool with_timing) const {
    const std::size_t width = with_timing ? 55 : 45;
    std::string out;
    char line[160];
    if (with_timing)
        std::snprintf(line, sizeof(line), "%-6s %-24s %13s %9s\n", "status", "check", "margin",
                      "seconds");
    else
        std::snprintf(line, sizeof(line), "%-6s %-24s %13s\n", "status", "check", "margin");
    out += line;
    out += std::string(width, '-') + "\n";
    for (const auto& c : checks) {
        const char* tag = c.status == CheckStatus::pass         ? "PASS"
                          : c.status == CheckStatus::fail       ? "FAIL"
                                                                : "INCONCLUSIVE";
        if (with_timing)
            std::snprintf(line, sizeof(line), "%-6s %-24s %+13.4e %9.2f\n", tag, c.name.c_str(),
                          c.margin, c.wall_seconds);
        else
            std::snprintf(line, sizeof(line), "%-6s %-24s %+13.4e\n", tag, c.name.c_str(),
                          c.margin);
        out += line;
    }
    std::snprintf(line, sizeof(line), "overall: %s\n", all_passed() ? "PASS" : "FAIL");
    out += std::string(width, '-') + "\n";
    out += line;
    return out;
}

PropertyCheck verify_moments(const InverseSample& sample, const std::vector<double>& lambdas) {
    if (sample.values.size() < 2) throw std::invalid_argument("sample too small");
    if (lambdas.empty()) throw std::invalid_argument("no moment orders given");
    if (!(sample.t > 0.0)) throw std::invalid_argument("moment check needs t > 0");
    const FractionalOrder fo(sample.beta);

    PropertyCheck c;
    c.name = "inverse_moments";
    c.statement = "sample moments of the inverse process match "
                  "Gamma(lambda+1)/Gamma(lambda*beta+1) * t^(lambda*beta) within 3 stderr";
    c.details["beta"] = sample.beta;
    c.details["t"] = sample.t;
    c.details["n"] = sample.values.size();
    auto& rows = c.details["moments"] = nlohmann::ordered_json::array();

    double margin = kInf;
    std::vector<double> powers(sample.values.size());
    for (double lambda : lambdas) {
        for (std::size_t i = 0; i < sample.values.size(); ++i)
            powers[i] = std::pow(sample.values[i], lambda);
        const MeanSe ms = mean_and_se(powers);
        const double exact = inverse_moment(fo, lambda, sample.t);
        const double m = 3.0 * ms.se - std::fabs(ms.mean - exact);
        margin = std::min(margin, m);
        c.budget.mc = std::max(c.budget.mc, 3.0 * ms.se);
        rows.push_back({{"lambda", lambda},
                        {"exact", exact},
                        {"estimate", ms.mean},
                        {"stderr", ms.se},
                        {"margin", m}});
    }
    c.margin = margin;
    c.n_points_checked = lambdas.size();
    c.status = margin >= 0.0 ? CheckStatus::pass : CheckStatus::fail;
    return c;
}

PropertyCheck verify_moments(const FractionalOrder& beta, const std::vector<double>& lambdas,
                             const std::vector<double>& times, std::size_t n, std::uint64_t seed,
                             int workers) {
    if (lambdas.empty() || times.empty())
        throw std::invalid_argument("need at least one moment order and one time");
    PropertyCheck c;
    c.name = "inverse_moments";
    c.statement = "sample moments of the inverse process match "
                  "Gamma(lambda+1)/Gamma(lambda*beta+1) * t^(lambda*beta) within 3 stderr";
    c.details["beta"] = beta.value();
    c.details["n"] = n;
    auto& rows = c.details["cells"] = nlohmann::ordered_json::array();
    double margin = kInf;
    for (double t : times) {
        const InverseSample sample = sample_inverse(beta, t, n, seed, workers);
        if (t == 0.0) {
            // Exact zeros by construction; the comparison is definitional.
            double worst = 0.0;
            for (double v : sample.values) worst = std::max(worst, std::fabs(v));
            margin = std::min(margin, -worst);
            rows.push_back({{"t", 0.0}, {"exact_zeros", worst == 0.0}});
            c.n_points_checked += 1;
            continue;
        }
        const PropertyCheck sub = verify_moments(sample, lambdas);
        margin = std::min(margin, sub.margin);
        c.budget.mc = std::max(c.budget.mc, sub.budget.mc);
        c.n_points_checked += sub.n_points_checked;
        rows.push_back({{"t", t}, {"margin", sub.margin}, {"moments", sub.details["moments"]}});
    }
    c.margin = margin;
    c.status = margin >= 0.0 ? CheckStatus::pass : CheckStatus::fail;
    return c;
}

PropertyCheck verify_distribution(const InverseSample& sample, double ks_tol) {
    const std::size_t n = sample.values.size();
    if (n < 2) throw std::invalid_argument("sample too small");
    if (!(sample.t > 0.0)) throw std::invalid_argument("distribution check needs t > 0");
    if (!(ks_tol > 0.0)) throw std::invalid_argument("ks tolerance must be positive");
    const FractionalOrder fo(sample.beta);
    const double beta = fo.value();
    const double t = sample.t;

    // Span the support until the exact CDF leaves at most 1e-6 in the tail.
    auto exact_cdf = [&](double s) {
        return stable_survival(fo, t * std::pow(s, -1.0 / beta));
    };
    double span = 2.0 * std::max(1.0, inverse_moment(fo, 1.0, t));
    int doublings = 0;
    while (exact_cdf(span) < 1.0 - 1e-6) {
        span *= 2.0;
        if (++doublings > 60) throw NumericalError("inverse CDF support did not close");
    }

    // Reference CDF integrated from the density itself.
    const std::size_t m = 16384;
    const double h = span / static_cast<double>(m);
    std::vector<double> cdf(m + 1, 0.0);
    double prev_pdf = std::pow(t, -beta) / fo.gamma_one_minus();  // density limit at s = 0
    for (std::size_t k = 1; k <= m; ++k) {
        const double pdf = inverse_pdf(fo, static_cast<double>(k) * h, t);
        cdf[k] = cdf[k - 1] + 0.5 * h * (prev_pdf + pdf);
        prev_pdf = pdf;
    }

    std::vector<double> sorted = sample.values;
    std::sort(sorted.begin(), sorted.end());
    auto cdf_at = [&](double s) {
        if (s <= 0.0) return 0.0;
        if (s >= span) return cdf[m];
        const double pos = s / h;
        const std::size_t k = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(k);
        return cdf[k] + frac * (cdf[k + 1] - cdf[k]);
    };
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf_at(sorted[i]);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        ks = std::max(ks, std::max(std::fabs(hi - f), std::fabs(f - lo)));
    }

    PropertyCheck c;
    c.name = "inverse_distribution";
    c.statement = "KS distance between inverse-process draws and the CDF integrated "
                  "from inverse_pdf stays below tolerance";
    c.budget.mc = ks_tol;
    c.margin = ks_tol - ks;
    c.n_points_checked = n;
    c.status = c.margin >= 0.0 ? CheckStatus::pass : CheckStatus::fail;
    c.details["beta"] = sample.beta;
    c.details["t"] = t;
    c.details["n"] = n;
    c.details["ks"] = ks;
    c.details["tolerance"] = ks_tol;
    c.details["integration_span"] = span;
    c.details["integrated_mass"] = cdf[m];
    return c;
}

PropertyCheck verify_spatial_modulus(const ValueField& field, const QuotientModel& model,
                                     const LagrangianPair& pair, double growth_c) {
    const std::size_t nx = field.nx(), nt = field.nt();
    if (nx < 2) throw std::invalid_argument("need at least two x points");
    if (!(growth_c > 0.0)) throw std::invalid_argument("growth constant must be positive");
    const std::size_t amb = model.ambient_dim;

    PropertyCheck c;
    c.name = "spatial_modulus";
    c.statement = "|u(x,t) - u(y,t)| <= C * max sqrt(L)(+-(f(x)-f(y))/t) for every pair "
                  "of grid points, every time node, within 3 stderr";
    std::size_t violations = 0, pairs_checked = 0;
    double margin = kInf;
    nlohmann::ordered_json worst;
    std::vector<double> diff(amb);
    for (std::size_t i = 0; i < nx; ++i) {
        auto fi = model.section_value(field.x_index[i]);
        for (std::size_t j = i + 1; j < nx; ++j) {
            auto fj = model.section_value(field.x_index[j]);
            for (std::size_t d = 0; d < amb; ++d) diff[d] = fi[d] - fj[d];
            for (std::size_t ti = 0; ti < nt; ++ti) {
                const double t = field.time_grid[ti];
                const auto fwd = scaled(diff, 1.0 / t);
                const auto bwd = scaled(diff, -1.0 / t);
                const double rhs = growth_c * std::max(pair.sqrt_L(fwd), pair.sqrt_L(bwd));
                const double lhs = std::fabs(field.u_at(i, ti) - field.u_at(j, ti));
                const double tol = 3.0 * (field.se_at(i, ti) + field.se_at(j, ti))
                                   + 1e-9 * (1.0 + rhs);
                const double m = rhs + tol - lhs;
                c.budget.mc = std::max(c.budget.mc, tol);
                ++pairs_checked;
                if (m < 0.0) ++violations;
                if (m < margin) {
                    margin = m;
                    worst = {{"x_a", field.x_index[i]},
                             {"x_b", field.x_index[j]},
                             {"t", t},
                             {"lhs", lhs},
                             {"rhs", rhs}};
                }
            }
        }
    }
    c.margin = margin;
    c.n_points_checked = pairs_checked;
    c.status = violations == 0 ? CheckStatus::pass : CheckStatus::fail;
    c.details["pairs_checked"] = pairs_checked;
    c.details["violations"] = violations;
    c.details["worst"] = worst;
    return c;
}

PropertyCheck verify_monotonicity(const ValueField& field) {
    const std::size_t nx = field.nx(), nt = field.nt();
    PropertyCheck c;
    c.name = "time_monotonicity";
    c.statement = "u(x,.) never increases along the time grid, from the exact t = 0 row "
                  "onward, within 3 RSS stderr; the pathwise violation counter is zero";
    double margin = kInf;
    std::size_t violations = 0, pairs_checked = 0;
    nlohmann::ordered_json worst;
    for (std::size_t xi = 0; xi < nx; ++xi) {
        // Node 0 is the exact boundary value with zero standard error.
        std::vector<double> v(nt + 1), se(nt + 1, 0.0);
        v[0] = field.g_row[xi];
        for (std::size_t ti = 0; ti < nt; ++ti) {
            v[ti + 1] = field.u_at(xi, ti);
            se[ti + 1] = field.se_at(xi, ti);
        }
        for (std::size_t a = 0; a < nt + 1; ++a) {
            for (std::size_t b = a + 1; b < nt + 1; ++b) {
                const double inc = v[b] - v[a];
                const double tol = 3.0 * std::sqrt(se[a] * se[a] + se[b] * se[b])
                                   + 1e-9 * (1.0 + std::fabs(v[a]));
                const double m = tol - inc;
                c.budget.mc = std::max(c.budget.mc, tol);
                ++pairs_checked;
                if (m < 0.0) ++violations;
                if (m < margin) {
                    margin = m;
                    worst = {{"x", field.x_index[xi]}, {"from", a}, {"to", b}, {"increase", inc}};
                }
            }
        }
    }
    c.details["pairs_checked"] = pairs_checked;
    c.details["mean_level_violations"] = violations;
    c.details["pathwise_violations"] = field.monotonicity_violations;
    c.details["pathwise_counter_active"] = !field.conditioned;
    c.details["worst"] = worst;
    if (field.monotonicity_violations > 0)
        margin = std::min(margin, -static_cast<double>(field.monotonicity_violations));
    c.margin = margin;
    c.n_points_checked = pairs_checked;
    c.status = (violations == 0 && field.monotonicity_violations == 0) ? CheckStatus::pass
                                                                       : CheckStatus::fail;
    return c;
}

PropertyCheck verify_time_holder(const ValueField& field, double headroom) {
    const std::size_t nx = field.nx(), nt = field.nt();
    if (!(headroom >= 1.0)) throw std::invalid_argument("headroom must be at least 1");
    PropertyCheck c;
    c.name = "time_holder";
    c.statement = "a power law fitted to max_x |u(x,t)-u(x,s)| on alternating gap classes "
                  "predicts the held-out classes within headroom and 3 stderr";
    if (nt < 6) {
        c.status = CheckStatus::inconclusive;
        c.details["reason"] = "too few time nodes for a holdout split";
        return c;
    }

    struct GapStat {
        double gap = 0.0;
        double dev = 0.0;     // max_x |du| over pairs in the class
        double se_sum = 0.0;  // stderr sum at the maximising pair
    };
    std::vector<GapStat> raw;
    for (std::size_t a = 0; a < nt; ++a) {
        for (std::size_t b = a + 1; b < nt; ++b) {
            GapStat s;
            s.gap = field.time_grid[b] - field.time_grid[a];
            for (std::size_t xi = 0; xi < nx; ++xi) {
                const double d = std::fabs(field.u_at(xi, b) - field.u_at(xi, a));
                if (d > s.dev) {
                    s.dev = d;
                    s.se_sum = field.se_at(xi, a) + field.se_at(xi, b);
                }
            }
            raw.push_back(s);
        }
    }
    std::sort(raw.begin(), raw.end(), [](const GapStat& l, const GapStat& r) {
        return l.gap < r.gap;
    });
    std::vector<GapStat> classes;
    for (const auto& s : raw) {
        if (!classes.empty() && std::fabs(s.gap - classes.back().gap) <= 1e-9 * s.gap) {
            if (s.dev > classes.back().dev) {
                classes.back().dev = s.dev;
                classes.back().se_sum = s.se_sum;
            }
        } else {
            classes.push_back(s);
        }
    }

    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < classes.size(); k += 2) {
        if (classes[k].dev <= 1e-300) continue;
        lx.push_back(std::log(classes[k].gap));
        ly.push_back(std::log(classes[k].dev));
    }
    if (lx.size() < 2 || classes.size() < 3) {
        c.status = CheckStatus::inconclusive;
        c.details["reason"] = "not enough usable gap classes";
        return c;
    }
    const LineFit fit = fit_line(lx, ly);

    double margin = kInf;
    std::size_t violations = 0, held_out = 0;
    nlohmann::ordered_json worst;
    for (std::size_t k = 1; k < classes.size(); k += 2) {
        const double pred = std::exp(fit.intercept + fit.slope * std::log(classes[k].gap));
        const double bound = headroom * pred + 3.0 * classes[k].se_sum;
        const double m = bound - classes[k].dev;
        ++held_out;
        c.budget.mc = std::max(c.budget.mc, 3.0 * classes[k].se_sum);
        c.budget.fd = std::max(c.budget.fd, (headroom - 1.0) * pred);
        if (m < 0.0) ++violations;
        if (m < margin) {
            margin = m;
            worst = {{"gap", classes[k].gap}, {"observed", classes[k].dev}, {"bound", bound}};
        }
    }
    c.margin = margin;
    c.n_points_checked = held_out;
    c.status = violations == 0 ? CheckStatus::pass : CheckStatus::fail;
    c.details["exponent"] = fit.slope;
    c.details["amplitude"] = std::exp(fit.intercept);
    c.details["classes"] = classes.size();
    c.details["held_out"] = held_out;
    c.details["violations"] = violations;
    c.details["headroom"] = headroom;
    c.details["worst"] = worst;
    return c;
}

PropertyCheck verify_initial_layer(const ValueField& field, double c_bound, double slope_tol) {
    const std::size_t nx = field.nx(), nt = field.nt();
    if (!(c_bound > 0.0)) throw std::invalid_argument("layer constant must be positive");
    if (nt < 3) throw std::invalid_argument("need at least three time nodes");
    PropertyCheck c;
    c.name = "initial_layer";
    c.statement = "max_x |u(x,t) - g(x)| decays like t^beta: log-log slope within "
                  "tolerance of beta and envelope c*t^beta respected within 3 stderr";

    std::vector<double> lt, lm;
    double margin = kInf;
    std::size_t violations = 0;
    auto& rows = c.details["nodes"] = nlohmann::ordered_json::array();
    for (std::size_t ti = 0; ti < nt; ++ti) {
        const double t = field.time_grid[ti];
        double dev = 0.0, se = 0.0;
        for (std::size_t xi = 0; xi < nx; ++xi) {
            const double d = std::fabs(field.u_at(xi, ti) - field.g_row[xi]);
            if (d > dev) {
                dev = d;
                se = field.se_at(xi, ti);
            }
        }
        const double envelope = c_bound * std::pow(t, field.beta);
        const double allow = envelope + 3.0 * se + 1e-9 * (1.0 + envelope);
        const double m = allow - dev;
        c.budget.mc = std::max(c.budget.mc, 3.0 * se);
        if (m < 0.0) ++violations;
        margin = std::min(margin, m);
        rows.push_back({{"t", t}, {"max_dev", dev}, {"envelope", envelope}, {"margin", m}});
        if (dev > 1e-300) {
            lt.push_back(std::log(t));
            lm.push_back(std::log(dev));
        }
    }
    if (lt.size() < 3) {
        c.status = CheckStatus::inconclusive;
        c.details["reason"] = "layer deviations too small to fit a slope";
        return c;
    }
    const LineFit fit = fit_line(lt, lm);
    const double slope_margin = slope_tol - std::fabs(fit.slope - field.beta);
    margin = std::min(margin, slope_margin);
    c.margin = margin;
    c.n_points_checked = nt;
    c.status = (violations == 0 && slope_margin >= 0.0) ? CheckStatus::pass : CheckStatus::fail;
    c.details["slope"] = fit.slope;
    c.details["beta"] = field.beta;
    c.details["slope_tolerance"] = slope_tol;
    c.details["slope_margin"] = slope_margin;
    c.details["envelope_constant"] = c_bound;
    c.details["envelope_violations"] = violations;
    return c;
}

PropertyCheck verify_dpp(const ValueField& field, const QuotientModel& model,
                         const LagrangianPair& pair, double growth_c,
                         const std::vector<std::pair<std::size_t, std::size_t>>& index_pairs) {
    if (!pair.is_quadratic())
        throw std::invalid_argument("the dynamic programming check needs the quadratic pair, "
                                    "whose transport cost is clock-independent");
    if (index_pairs.empty()) throw std::invalid_argument("no (s,t) index pairs given");
    const std::size_t nx = field.nx(), nt = field.nt();
    const std::size_t amb = model.ambient_dim;

    PropertyCheck c;
    c.name = "dpp_inequality";
    c.statement = "u(x,t) <= min_y [ C*|f(x)-f(y)|/sqrt(2) + u(y,s) ] for s < t, "
                  "within 3 combined stderr";
    double margin = kInf;
    std::size_t violations = 0, cells = 0;
    nlohmann::ordered_json worst;
    auto& rows = c.details["pairs"] = nlohmann::ordered_json::array();
    for (auto [si, ti] : index_pairs) {
        if (si >= ti || ti >= nt)
            throw std::invalid_argument("index pairs must satisfy s < t inside the grid");
        double pair_margin = kInf;
        for (std::size_t i = 0; i < nx; ++i) {
            auto fi = model.section_value(field.x_index[i]);
            double rhs = kInf, rhs_se = 0.0;
            for (std::size_t j = 0; j < nx; ++j) {
                auto fj = model.section_value(field.x_index[j]);
                double sq = 0.0;
                for (std::size_t d = 0; d < amb; ++d)
                    sq += (fi[d] - fj[d]) * (fi[d] - fj[d]);
                const double cand = growth_c * std::sqrt(sq / 2.0) + field.u_at(j, si);
                if (cand < rhs) {
                    rhs = cand;
                    rhs_se = field.se_at(j, si);
                }
            }
            const double lhs = field.u_at(i, ti);
            const double tol = 3.0 * (field.se_at(i, ti) + rhs_se) + 1e-9 * (1.0 + std::fabs(rhs));
            const double m = rhs + tol - lhs;
            c.budget.mc = std::max(c.budget.mc, tol);
            ++cells;
            if (m < 0.0) ++violations;
            if (m < margin) {
                margin = m;
                worst = {{"x", field.x_index[i]},
                         {"s", field.time_grid[si]},
                         {"t", field.time_grid[ti]},
                         {"lhs", lhs},
                         {"rhs", rhs}};
            }
            pair_margin = std::min(pair_margin, m);
        }
        rows.push_back({{"s", field.time_grid[si]},
                        {"t", field.time_grid[ti]},
                        {"min_margin", pair_margin}});
    }
    c.margin = margin;
    c.n_points_checked = cells;
    c.status = violations == 0 ? CheckStatus::pass : CheckStatus::fail;
    c.details["cells"] = cells;
    c.details["violations"] = violations;
    c.details["conditioned_field"] = field.conditioned;
    c.details["minimiser_restricted_to_evaluated_points"] = field.nx() < model.n_points();
    c.details["worst"] = worst;
    return c;
}

PropertyCheck verify_subsolution(const ValueField& field, const QuotientModel& model,
                                 const LagrangianPair& pair, double growth_c,
                                 double max_excluded_fraction) {
    const std::size_t nx = field.nx(), nt = field.nt();
    if (field.base_dim != 1)
        throw std::invalid_argument("the residual check needs a one-dimensional base grid");
    if (nx < 3) throw std::invalid_argument("need at least three x points");
    const double dt = field.time_grid[0];
    for (std::size_t ti = 0; ti < nt; ++ti) {
        const double expected = dt * static_cast<double>(ti + 1);
        if (std::fabs(field.time_grid[ti] - expected) > 1e-9 * expected)
            throw std::invalid_argument("residual check needs a uniform time grid starting at dt");
    }
    const FractionalOrder fo(field.beta);
    const double beta = fo.value();

    // Grid controls: every base point, with its exact section image.
    const std::size_t nq = model.n_points();
    std::vector<double> q_coord(nq), q_cost(nq);
    for (std::size_t j = 0; j < nq; ++j) {
        q_coord[j] = model.base_point(j)[0];
        q_cost[j] = growth_c * pair.sqrt_L(model.section_value(j));
    }
    auto hamiltonian = [&](double p) {
        double h = -kInf;
        for (std::size_t j = 0; j < nq; ++j) h = std::max(h, p * q_coord[j] - q_cost[j]);
        return h;
    };

    PropertyCheck c;
    c.name = "subsolution_residual";
    c.statement = "L1 Caputo derivative of u(x,.) plus max_q [ Du.q - C*sqrt(L)(f(q)) ] "
                  "stays within the noise-plus-truncation budget at every cell with a "
                  "trustworthy gradient";
    const auto w = l1_weights(nt, beta);
    const double trunc_pref = std::pow(dt, 2.0 - beta) / (2.0 * fo.gamma_two_minus());
    double margin = kInf;
    std::size_t checked = 0, excluded = 0, violations = 0;
    nlohmann::ordered_json worst;
    for (std::size_t xi = 1; xi + 1 < nx; ++xi) {
        std::vector<double> v(nt + 1), se(nt + 1, 0.0);
        v[0] = field.g_row[xi];
        for (std::size_t ti = 0; ti < nt; ++ti) {
            v[ti + 1] = field.u_at(xi, ti);
            se[ti + 1] = field.se_at(xi, ti);
        }
        const TimeSeries cap = caputo_l1(TimeSeries(0.0, dt, v), fo);
        const TimeSeries noise = caputo_l1_noise(TimeSeries(0.0, dt, se), fo);
        // Curvature proxy per node for the L1 truncation estimate.
        std::vector<double> curv(nt + 1, 0.0);
        for (std::size_t j = 1; j < nt; ++j)
            curv[j] = std::fabs(v[j + 1] - 2.0 * v[j] + v[j - 1]) / (dt * dt);
        curv[0] = curv[1];
        curv[nt] = curv[nt - 1];
        for (std::size_t n = 1; n <= nt; ++n) {
            const std::size_t ti = n - 1;
            const GradientResult grad = gradient_Du(field, xi, ti);
            if (!grad.valid) {
                ++excluded;
                continue;
            }
            double trunc = 0.0;
            for (std::size_t k = 0; k < n; ++k) trunc += w[k] * curv[n - k];
            trunc *= trunc_pref;
            const double h0 = hamiltonian(grad.value);
            const double hhi = hamiltonian(grad.value + 3.0 * grad.noise);
            const double hlo = hamiltonian(grad.value - 3.0 * grad.noise);
            const double band = std::max(hhi, hlo) - h0;
            const double residual = cap.values[n - 1] + h0;
            const double budget = 3.0 * noise.values[n - 1] + band + trunc
                                  + 1e-9 * (1.0 + std::fabs(cap.values[n - 1]));
            const double m = budget - residual;
            c.budget.mc = std::max(c.budget.mc, 3.0 * noise.values[n - 1] + band);
            c.budget.fd = std::max(c.budget.fd, trunc);
            ++checked;
            if (m < 0.0) ++violations;
            if (m < margin) {
                margin = m;
                worst = {{"x", field.x_index[xi]},
                         {"t", field.time_grid[ti]},
                         {"residual", residual},
                         {"budget", budget}};
            }
        }
    }
    const std::size_t total = checked + excluded;
    if (checked == 0)
        throw NumericalError("no checkable cells: every interior gradient failed validation");
    const double excluded_frac = static_cast<double>(excluded) / static_cast<double>(total);
    c.margin = margin;
    c.n_points_checked = checked;
    c.details["cells_checked"] = checked;
    c.details["cells_excluded"] = excluded;
    c.details["excluded_fraction"] = excluded_frac;
    c.details["violations"] = violations;
    c.details["conditioned_field"] = field.conditioned;
    c.details["worst"] = worst;
    if (excluded_frac > max_excluded_fraction) {
        c.status = CheckStatus::inconclusive;
        c.details["reason"] = "too many cells lack a trustworthy gradient";
    } else {
        c.status = violations == 0 ? CheckStatus::pass : CheckStatus::fail;
    }
    return c;
}

} // namespace fhl
