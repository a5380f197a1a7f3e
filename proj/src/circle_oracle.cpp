#include "ridge/circle_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ridge/errors.hpp"
#include "ridge/rng.hpp"

namespace ridge {

namespace {

// I1(t)/I0(t) via the continued fraction from the three-term recurrence,
// evaluated with the modified Lentz algorithm.  Converges for all t > 0.
double bessel_ratio_cf(double t) {
    const double tiny = 1e-300;
    double f = tiny, c = f, d = 0.0;
    for (int k = 1; k < 2000000; ++k) {
        const double b = 2.0 * static_cast<double>(k) / t; // b_k
        d = b + d;
        if (d == 0.0) d = tiny;
        c = b + 1.0 / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return f;
}

} // namespace

double log_bessel_i0(double t) {
    if (t < 0.0) throw input_error("log_bessel_i0: argument must be non-negative");
    if (t < 600.0) {
        // power series sum_m ((t/2)^m / m!)^2; safe from overflow below ~700
        double term = 1.0, sum = 1.0;
        const double q = 0.25 * t * t;
        for (int m = 1; m < 10000; ++m) {
            term *= q / (static_cast<double>(m) * static_cast<double>(m));
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return std::log(sum);
    }
    // asymptotic: I0(t) ~ e^t / sqrt(2 pi t) * (1 + 1/(8t) + 9/(128 t^2) + ...)
    const double u = 1.0 / t;
    const double series =
        1.0 + u * (0.125 + u * (0.0703125 + u * (0.0732421875 + u * 0.112152099609375)));
    return t - 0.5 * std::log(2.0 * std::numbers::pi * t) + std::log(series);
}

double bessel_nu(double t) {
    if (t < 0.0) throw input_error("bessel_nu: argument must be non-negative");
    if (t == 0.0) return 2.0; // limit t I0/I1 -> 2 as t -> 0+
    if (t <= 30.0) {
        // direct series for I0 and I1; no overflow in this range
        const double q = 0.25 * t * t;
        double i0 = 1.0, t0 = 1.0;
        for (int m = 1; m < 200; ++m) {
            t0 *= q / (static_cast<double>(m) * static_cast<double>(m));
            i0 += t0;
            if (t0 < 1e-17 * i0) break;
        }
        double i1 = 0.5 * t, t1 = 0.5 * t;
        for (int m = 1; m < 200; ++m) {
            t1 *= q / (static_cast<double>(m) * static_cast<double>(m + 1));
            i1 += t1;
            if (t1 < 1e-17 * i1) break;
        }
        return t * i0 / i1;
    }
    return t / bessel_ratio_cf(t);
}

double circle_density(double r, double sigma, const Vec& x) {
    if (!(sigma > 0.0)) throw input_error("circle_density: sigma must be positive");
    if (r < 0.0) throw input_error("circle_density: radius must be non-negative");
    if (x.size() != 2) throw input_error("circle_density: point must be 2-D");
    const double nx = std::hypot(x[0], x[1]);
    const double s2 = sigma * sigma;
    const double logf = -std::log(2.0 * std::numbers::pi * s2) +
                        log_bessel_i0(r * nx / s2) - (r * r + nx * nx) / (2.0 * s2);
    return std::exp(logf);
}

double true_ridge_radius(double r, double sigma) {
    if (!(sigma > 0.0)) throw input_error("true_ridge_radius: sigma must be positive");
    if (r < 0.0) throw input_error("true_ridge_radius: radius must be non-negative");
    const double ratio2 = (r / sigma) * (r / sigma);
    if (ratio2 <= 2.0) return 0.0;

    // nu(alpha t) is increasing in t; the target crosses between 0 and r.
    const double alpha = r / (sigma * sigma);
    double lo = 0.0, hi = r;
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        (bessel_nu(alpha * mid) < ratio2 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

PointCloud sample_circle(std::size_t n, double r, double sigma, std::uint64_t seed) {
    if (n == 0) throw input_error("sample_circle: need n >= 1");
    if (r < 0.0 || sigma < 0.0)
        throw input_error("sample_circle: negative radius or noise level");
    const CounterRng angles = CounterRng(seed).substream(1);
    const CounterRng noise = CounterRng(seed).substream(2);

    PointCloud cloud;
    cloud.d = 2;
    cloud.labels = {"x", "y"};
    cloud.coords.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = 2.0 * std::numbers::pi * angles.uniform(i);
        double z1, z2;
        noise.normal_pair(i, z1, z2);
        cloud.push_back({r * std::cos(theta) + sigma * z1,
                         r * std::sin(theta) + sigma * z2});
    }
    return cloud;
}

namespace {

double directed_hausdorff(const PointCloud& a, const PointCloud& b, bool parallel) {
    double worst = 0.0;
    const long n = static_cast<long>(a.n);
#pragma omp parallel for reduction(max : worst) if (parallel)
    for (long i = 0; i < n; ++i) {
        const double* p = a.point(static_cast<std::size_t>(i));
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.n; ++j) {
            const double* q = b.point(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.d; ++k) {
                const double c = p[k] - q[k];
                s += c * c;
            }
            nearest = std::min(nearest, s);
        }
        worst = std::max(worst, nearest);
    }
    return std::sqrt(worst);
}

double hausdorff_impl(const PointCloud& a, const PointCloud& b, bool parallel) {
    if (a.n == 0 || b.n == 0) throw input_error("hausdorff: empty point set");
    if (a.d != b.d) throw input_error("hausdorff: dimension mismatch");
    return std::max(directed_hausdorff(a, b, parallel),
                    directed_hausdorff(b, a, parallel));
}

} // namespace

double hausdorff(const PointCloud& a, const PointCloud& b) {
    return hausdorff_impl(a, b, true);
}

double hausdorff_serial(const PointCloud& a, const PointCloud& b) {
    return hausdorff_impl(a, b, false);
}

} // namespace ridge
