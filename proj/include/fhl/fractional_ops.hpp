#pragma once

#include "fhl/fractional_order.hpp"

#include <cstddef>
#include <vector>

namespace fhl {

/// Values on a uniform time grid t0, t0 + dt, ...
struct TimeSeries {
    TimeSeries(double t0_, double dt_, std::vector<double> values_);

    double t0;
    double dt;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
};

/// L1 discretisation of the order-beta Caputo derivative of a series
/// anchored at t = 0. Output lives on t = dt, ..., (N-1)*dt and is exact
/// for affine input.
TimeSeries caputo_l1(const TimeSeries& series, const FractionalOrder& beta);

/// Standard error of caputo_l1 when the input values carry independent
/// per-node standard errors (root-sum-square through the L1 weights).
TimeSeries caputo_l1_noise(const TimeSeries& stderrs, const FractionalOrder& beta);

/// Riemann-Liouville derivative: Caputo plus the v(0) * t^(-beta) / Gamma(1-beta)
/// memory of the initial value.
TimeSeries rl_derivative(const TimeSeries& series, const FractionalOrder& beta);

/// Riemann-Liouville integral of order alpha > 0 on the same grid, with the
/// integrand interpolated linearly on each step (product trapezoidal rule).
/// Output starts at t = 0 with value 0.
TimeSeries fractional_integral(const TimeSeries& series, double alpha);

} // namespace fhl
