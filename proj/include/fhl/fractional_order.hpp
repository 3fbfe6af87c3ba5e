#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace fhl {

/// Fractional order beta restricted to the open interval (0,1), with the
/// gamma-function constants that appear throughout the library precomputed.
class FractionalOrder {
public:
    explicit FractionalOrder(double beta) : beta_(beta) {
        if (!(beta > 0.0 && beta < 1.0)) {
            throw std::invalid_argument("fractional order must lie in (0,1), got " +
                                        std::to_string(beta));
        }
        gamma_1m_ = std::tgamma(1.0 - beta);
        gamma_1p_ = std::tgamma(1.0 + beta);
        gamma_2m_ = std::tgamma(2.0 - beta);
    }

    double value() const { return beta_; }
    double gamma_one_minus() const { return gamma_1m_; }   // Gamma(1-beta)
    double gamma_one_plus() const { return gamma_1p_; }    // Gamma(1+beta)
    double gamma_two_minus() const { return gamma_2m_; }   // Gamma(2-beta)

    /// Moment constant of the inverse subordinator marginal:
    /// E[E_t^lambda] = moment_constant(lambda) * t^(lambda*beta).
    double moment_constant(double lambda) const {
        if (lambda <= 0.0) throw std::invalid_argument("moment order must be positive");
        return std::exp(std::lgamma(lambda + 1.0) - std::lgamma(lambda * beta_ + 1.0));
    }

private:
    double beta_;
    double gamma_1m_, gamma_1p_, gamma_2m_;
};

} // namespace fhl
