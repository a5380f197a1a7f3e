#pragma once

#include <cmath>
#include <limits>
#include <numbers>

// Standard normal pdf/cdf plus log-domain helpers that stay accurate deep in
// the tails.  The smoothed log-concave estimator multiplies huge exponential
// prefactors with tiny Gaussian-cdf differences, so those products have to be
// assembled in log space.

namespace ridge {

inline constexpr double log_2pi = 1.8378770664093454836;

inline double normal_pdf(double t) {
    return std::exp(-0.5 * t * t - 0.5 * log_2pi);
}

inline double normal_cdf(double t) {
    return 0.5 * std::erfc(-t * std::numbers::sqrt2 / 2.0);
}

// log(e^a - e^b) for a > b.
inline double log_sub_exp(double a, double b) {
    return a + std::log1p(-std::exp(b - a));
}

// log of the upper tail P(Z > t) for t >= 0.  erfc underflows around
// t ~ 37.5; past that use the Mills-ratio asymptotic series.
inline double log_normal_tail(double t) {
    if (t < 36.0) {
        return std::log(0.5 * std::erfc(t * std::numbers::sqrt2 / 2.0));
    }
    const double s = 1.0 / (t * t);
    const double series = 1.0 + s * (-1.0 + s * (3.0 + s * (-15.0 + s * 105.0)));
    return -0.5 * t * t - 0.5 * log_2pi - std::log(t) + std::log(series);
}

// log(Phi(r) - Phi(l)) for l < r, stable when both endpoints sit in the
// same far tail.
inline double log_normal_cdf_diff(double l, double r) {
    if (l >= r) return -std::numeric_limits<double>::infinity();
    if (l >= 0.0) {
        // Both in the right tail: Phi(r) - Phi(l) = Q(l) - Q(r).
        return log_sub_exp(log_normal_tail(l), log_normal_tail(r));
    }
    if (r <= 0.0) {
        // Mirror image of the case above.
        return log_sub_exp(log_normal_tail(-r), log_normal_tail(-l));
    }
    // Straddles zero: the difference is not small, direct evaluation is fine
    // (the two erf terms have opposite signs, so no cancellation).
    const double d = 0.5 * (std::erf(r * std::numbers::sqrt2 / 2.0) -
                            std::erf(l * std::numbers::sqrt2 / 2.0));
    return std::log(d);
}

} // namespace ridge
