#include "fhl/stable_process.hpp"

#include "fhl/common.hpp"
#include "fhl/quadrature.hpp"
#include "fhl/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <thread>
#include <vector>

namespace fhl {
namespace {

constexpr double kPi = std::numbers::pi;

// Keeps a pathological tail draw finite; (t/D)^beta stays positive so the
// inner minimisation degenerates gracefully instead of dividing by zero.
constexpr double kMaxDraw = 1e300;

int resolve_workers(int workers) {
    if (workers > 0) return workers;
    const unsigned hc = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hc, 1u, 16u));
}

void parallel_fill(std::size_t n, int workers, const std::function<void(std::size_t)>& fill_one) {
    const int w = resolve_workers(workers);
    if (w <= 1 || n < 4096) {
        for (std::size_t i = 0; i < n; ++i) fill_one(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    constexpr std::size_t chunk = 4096;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (int t = 0; t < w; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t lo = next.fetch_add(chunk);
                if (lo >= n) return;
                const std::size_t hi = std::min(n, lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) fill_one(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace

double kanter_a(double beta, double phi) {
    const double s = std::sin(phi);
    return (std::sin((1.0 - beta) * phi) / s) *
           std::pow(std::sin(beta * phi) / s, beta / (1.0 - beta));
}

double kanter_draw(const FractionalOrder& beta, double uniform_angle, double uniform_exp) {
    if (!(uniform_angle > 0.0 && uniform_angle < 1.0) ||
        !(uniform_exp > 0.0 && uniform_exp < 1.0)) {
        throw std::invalid_argument("kanter_draw expects uniforms in the open interval (0,1)");
    }
    const double b = beta.value();
    const double phi = kPi * uniform_angle;
    const double w = -std::log(uniform_exp);
    const double d = std::pow(kanter_a(b, phi) / w, (1.0 - b) / b);
    return std::min(d, kMaxDraw);
}

StableSample sample_stable(const FractionalOrder& beta, std::size_t n, std::uint64_t seed,
                           int workers) {
    StableSample out{beta.value(), seed, std::vector<double>(n)};
    parallel_fill(n, workers, [&](std::size_t i) {
        PathRng rng(seed, i);
        const double u1 = rng.next_open01();
        const double u2 = rng.next_open01();
        out.values[i] = kanter_draw(beta, u1, u2);
    });
    return out;
}

InverseSample sample_inverse(const FractionalOrder& beta, double t, std::size_t n,
                             std::uint64_t seed, int workers) {
    if (t < 0.0) throw std::invalid_argument("time must be nonnegative");
    InverseSample out{beta.value(), t, seed, std::vector<double>(n)};
    if (t == 0.0) return out;  // E_0 = 0 exactly
    const double b = beta.value();
    parallel_fill(n, workers, [&](std::size_t i) {
        PathRng rng(seed, i);
        const double u1 = rng.next_open01();
        const double u2 = rng.next_open01();
        out.values[i] = std::pow(t / kanter_draw(beta, u1, u2), b);
    });
    return out;
}

double inverse_moment(const FractionalOrder& beta, double lambda, double t) {
    if (t < 0.0) throw std::invalid_argument("time must be nonnegative");
    if (t == 0.0) return 0.0;
    return beta.moment_constant(lambda) * std::pow(t, lambda * beta.value());
}

double stable_pdf(const FractionalOrder& beta, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("stable_pdf needs s > 0");
    const double b = beta.value();
    const double z = std::pow(s, -b / (1.0 - b));
    const double prefactor = b / (1.0 - b) * std::pow(s, -1.0 / (1.0 - b)) / kPi;
    if (!(prefactor > 0.0) || !std::isfinite(z)) return 0.0;

    const auto integrand = [b, z](double phi) {
        const double a = kanter_a(b, phi);
        const double az = a * z;
        return az > 700.0 ? 0.0 : a * std::exp(-az);
    };
    // Scale probe so absolute tolerance tracks the peak of a*exp(-z a),
    // which is 1/(e z) whenever a(.) crosses 1/z inside the interval.
    const double peak = std::max(integrand(kPi * 0.5), 1.0 / (std::exp(1.0) * z));
    const QuadratureResult q =
        integrate_gk(integrand, 0.0, kPi, 1e-9, std::max(peak * kPi * 1e-12, 1e-300));
    const double value = prefactor * q.value;
    return value < 1e-280 ? 0.0 : value;
}

double stable_survival(const FractionalOrder& beta, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("stable_survival needs x > 0");
    const double b = beta.value();
    const double z = std::pow(x, -b / (1.0 - b));
    if (!(z > 0.0)) return 0.0;
    const auto integrand = [b, z](double phi) {
        const double az = kanter_a(b, phi) * z;
        return az > 700.0 ? 1.0 : -std::expm1(-az);
    };
    const QuadratureResult q = integrate_gk(integrand, 0.0, kPi, 1e-9, 1e-14);
    return std::clamp(q.value / kPi, 0.0, 1.0);
}

double inverse_pdf(const FractionalOrder& beta, double s, double t) {
    if (!(s > 0.0)) throw std::invalid_argument("inverse_pdf needs s > 0");
    if (!(t > 0.0)) throw std::invalid_argument("inverse_pdf needs t > 0");
    const double b = beta.value();
    const double x = t * std::pow(s, -1.0 / b);
    return t / b * std::pow(s, -1.0 - 1.0 / b) * stable_pdf(beta, x);
}

} // namespace fhl
