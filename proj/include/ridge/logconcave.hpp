#pragma once

#include <cstdint>
#include <cstddef>

#include "ridge/linalg.hpp"

// Weighted univariate log-concave maximum likelihood: the density estimate
// exp(theta) with theta concave and piecewise linear between knots drawn from
// the data.  On top of the fitter sit the pieces the ridge search needs: the
// mode (with a midpoint convention on flat tops), superlevel intervals, the
// variance-matched Gaussian smoothing of the fit, a mode-constrained fit, and
// a likelihood-ratio confidence interval for the mode with Monte Carlo
// calibration of its critical value.

namespace ridge {

struct WeightedSample {
    Vec z; // strictly increasing after duplicate merging
    Vec w; // positive, sums to one
};

// Sort, merge coincident abscissae (summing their weights), drop non-positive
// weights, and normalize.  Throws degenerate_sample_error when nothing
// usable remains.
WeightedSample make_weighted_sample(Vec z, Vec w);

double sample_mean(const WeightedSample& s);
double sample_variance(const WeightedSample& s);

struct LogConcaveFit {
    Vec knots;  // subset of the sample's abscissae (plus the constraint point
                // for mode-constrained fits)
    Vec phi;    // log-density at the knots
    Vec slopes; // phi differences / knot gaps; non-increasing
    double loglik = 0.0; // sum w_i * theta(z_i)

    // theta(x); -infinity outside [knots.front(), knots.back()].
    double log_density(double x) const;

    double density_mean() const;
    double density_variance() const;
};

// Active-set maximum likelihood fit.  Requires at least two distinct points;
// the returned log-density integrates to one.
LogConcaveFit logconcave_fit(const WeightedSample& s);

struct ModeInfo {
    double location = 0.0;
    bool flat_top = false;
    double flat_lo = 0.0, flat_hi = 0.0; // the argmax interval when flat
};

// Argmax of the fit; on a flat top, the interval midpoint.
ModeInfo mode(const LogConcaveFit& fit);

struct Interval {
    double lo = 0.0, hi = 0.0;
};

// {x : theta(x) >= theta(mode) + log tau} for tau in (0, 1]; tau = 1
// degenerates to the argmax set.
Interval threshold_interval(const LogConcaveFit& fit, double tau);

// The fit convolved with a centered Gaussian whose variance gamma^2 tops the
// fitted variance up to the given empirical variance.  Every evaluation has a
// closed form, assembled in log space so steep fits cannot overflow.
struct SmoothedFit {
    LogConcaveFit base;
    double gamma = 0.0;
    bool gamma_clamped = false; // variance deficit was < 1e-12

    double pdf(double y) const;
    double dpdf(double y) const;
    double d2pdf(double y) const;
};

SmoothedFit smooth(const LogConcaveFit& fit, double empirical_variance);

// Unique maximizer of the smoothed density (safeguarded Newton on the
// derivative; |pdf'| <= 1e-10 at the returned point).
double smoothed_mode(const SmoothedFit& sf);

// Maximum likelihood fit constrained to have its mode at m (m is inserted as
// a knot; slopes are non-negative left of m and non-positive right of m).
// m must lie within the sample range.
LogConcaveFit constrained_fit(const WeightedSample& s, double m);

// 2 n sum_i w_i (theta_hat - theta_m)(z_i): twice the log likelihood ratio
// between the unconstrained fit and the mode-constrained fit at m.
double lrt_statistic(const WeightedSample& s, const LogConcaveFit& fit, double m);

struct LrtInterval {
    double lo = 0.0, hi = 0.0;
    bool monotone = true; // statistic monotone on each side of the mode
                          // (checked on a 50-point grid)
};

// {m : lrt_statistic(m) <= critical_value}, located by bisection outward from
// the mode of the internally computed unconstrained fit.
LrtInterval lr_confidence_interval(const WeightedSample& s, double alpha,
                                   double critical_value);

// Empirical (1-alpha)-quantile of the statistic over `reps` standard-normal
// samples of size n constrained at the true mode 0.  alpha = 1 asks for the
// 0-quantile of a nonnegative statistic, which is 0.
double calibrate_critical_value(double alpha, std::size_t n, std::size_t reps,
                                std::uint64_t seed);

} // namespace ridge
