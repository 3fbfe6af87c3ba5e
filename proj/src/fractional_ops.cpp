#include "fhl/fractional_ops.hpp"

#include <cmath>
#include <stdexcept>

namespace fhl {

namespace {

void require_anchored(const TimeSeries& s) {
    if (std::fabs(s.t0) > 1e-12 * s.dt)
        throw std::invalid_argument("series must start at t = 0");
    if (s.size() < 2) throw std::invalid_argument("series needs at least two nodes");
}

// w_k = (k+1)^(1-beta) - k^(1-beta), the L1 kernel weights.
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

TimeSeries::TimeSeries(double t0_, double dt_, std::vector<double> values_)
    : t0(t0_), dt(dt_), values(std::move(values_)) {
    if (!(std::isfinite(t0) && t0 >= 0.0)) throw std::invalid_argument("t0 must be finite and non-negative");
    if (!(std::isfinite(dt) && dt > 0.0)) throw std::invalid_argument("dt must be finite and positive");
    if (values.empty()) throw std::invalid_argument("series must be non-empty");
}

TimeSeries caputo_l1(const TimeSeries& series, const FractionalOrder& beta) {
    require_anchored(series);
    const std::size_t n_out = series.size() - 1;
    const double b = beta.value();
    const double pref = std::pow(series.dt, -b) / beta.gamma_two_minus();
    const auto w = l1_weights(n_out, b);
    std::vector<double> out(n_out);
    for (std::size_t n = 1; n <= n_out; ++n) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            acc += w[k] * (series.values[n - k] - series.values[n - k - 1]);
        out[n - 1] = pref * acc;
    }
    return TimeSeries(series.dt, series.dt, std::move(out));
}

TimeSeries caputo_l1_noise(const TimeSeries& stderrs, const FractionalOrder& beta) {
    require_anchored(stderrs);
    const std::size_t n_out = stderrs.size() - 1;
    const double b = beta.value();
    const double pref = std::pow(stderrs.dt, -b) / beta.gamma_two_minus();
    const auto w = l1_weights(n_out, b);
    std::vector<double> out(n_out);
    for (std::size_t n = 1; n <= n_out; ++n) {
        // Coefficient of node j in the L1 sum: w0 at j = n, the weight
        // difference in the interior, -w_{n-1} at j = 0.
        double ss = 0.0;
        auto add = [&](double c, double se) { ss += c * c * se * se; };
        add(w[0], stderrs.values[n]);
        for (std::size_t j = 1; j < n; ++j) add(w[n - j] - w[n - j - 1], stderrs.values[j]);
        add(w[n - 1], stderrs.values[0]);
        out[n - 1] = pref * std::sqrt(ss);
    }
    return TimeSeries(stderrs.dt, stderrs.dt, std::move(out));
}

TimeSeries rl_derivative(const TimeSeries& series, const FractionalOrder& beta) {
    TimeSeries out = caputo_l1(series, beta);
    const double v0 = series.values[0];
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] += v0 * std::pow(out.time(i), -beta.value()) / beta.gamma_one_minus();
    return out;
}

TimeSeries fractional_integral(const TimeSeries& series, double alpha) {
    require_anchored(series);
    if (!(std::isfinite(alpha) && alpha > 0.0))
        throw std::invalid_argument("integral order must be positive");
    const std::size_t n_nodes = series.size();
    const double dt = series.dt;
    const double inv_gamma = 1.0 / std::tgamma(alpha);
    // A_j integrates the kernel over step j, B_j the kernel times its argument.
    std::vector<double> a(n_nodes), bsum(n_nodes);
    double pa = 0.0, pb = 0.0;
    for (std::size_t j = 1; j < n_nodes; ++j) {
        const double ja = std::pow(static_cast<double>(j), alpha);
        const double jb = std::pow(static_cast<double>(j), alpha + 1.0);
        a[j] = std::pow(dt, alpha) * (ja - pa) / alpha;
        bsum[j] = std::pow(dt, alpha + 1.0) * (jb - pb) / (alpha + 1.0);
        pa = ja;
        pb = jb;
    }
    std::vector<double> out(n_nodes, 0.0);
    for (std::size_t n = 1; n < n_nodes; ++n) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
            const std::size_t m = n - j + 1;  // kernel panel index for source step j
            const double phi0 = series.values[j - 1];
            const double dphi = series.values[j] - series.values[j - 1];
            acc += phi0 * a[m] + dphi * (static_cast<double>(m) * a[m] - bsum[m] / dt);
        }
        out[n] = inv_gamma * acc;
    }
    return TimeSeries(0.0, dt, std::move(out));
}

} // namespace fhl
