#pragma once

#include <functional>

namespace fhl {

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;   // accumulated error estimate
    int evaluations = 0;
};

/// Adaptive Gauss-Kronrod 7/15 integration on [a, b]. Bisects until the
/// Kronrod-Gauss error estimate of every subinterval meets the mixed
/// tolerance; throws NumericalError when the subdivision budget runs out
/// while the estimate is still untrustworthy.
QuadratureResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                              double rel_tol, double abs_tol, int max_depth = 48);

} // namespace fhl
