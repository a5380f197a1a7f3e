#include "ridge/local_moments.hpp"

#include <cmath>
#include <sstream>

#include "ridge/errors.hpp"
#include "ridge/quadrature.hpp"

namespace ridge {

namespace {

[[noreturn]] void throw_empty(const Vec& x, double h) {
    std::ostringstream os;
    os << "empty neighborhood: no kernel mass at x = (";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ") with h = " << h;
    throw empty_neighborhood_error(os.str());
}

} // namespace

LocalMoments local_moments(const PointCloud& data, const Vec& x, double h,
                           const Kernel& kernel) {
    if (data.n == 0) throw input_error("local_moments: empty point cloud");
    if (data.d != kernel.dim || x.size() != data.d)
        throw input_error("local_moments: dimension mismatch");
    if (!(h > 0.0)) throw input_error("local_moments: bandwidth must be positive");

    const std::size_t n = data.n, d = data.d;
    const double hd = std::pow(h, -static_cast<double>(d));

    LocalMoments m;
    m.s1.assign(d, 0.0);
    m.s2 = Mat(d, d);
    m.weights.assign(n, 0.0);

    Vec u(d);
    double wsum = 0.0, wsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = data.point(i);
        double y = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            u[j] = (p[j] - x[j]) / h;
            y += u[j] * u[j];
        }
        const double w = hd * kernel.normalization * kernel.profile(y);
        m.weights[i] = w;
        wsum += w;
        wsq += w * w;
        for (std::size_t j = 0; j < d; ++j) {
            m.s1[j] += w * u[j];
            for (std::size_t l = j; l < d; ++l) m.s2(j, l) += w * u[j] * u[l];
        }
    }

    m.s0 = wsum / static_cast<double>(n);
    if (!(m.s0 > moment_floor)) throw_empty(x, h);

    for (std::size_t j = 0; j < d; ++j) {
        m.s1[j] /= static_cast<double>(n);
        for (std::size_t l = j; l < d; ++l) {
            m.s2(j, l) /= static_cast<double>(n);
            m.s2(l, j) = m.s2(j, l);
        }
    }
    for (double& w : m.weights) w /= wsum;
    m.n_eff = wsum * wsum / wsq;
    return m;
}

ConditionalCovariance conditional_covariance(const LocalMoments& m,
                                             const PointCloud& data, const Vec& x,
                                             double h) {
    (void)x;
    (void)h;
    const std::size_t n = data.n, d = data.d;
    ConditionalCovariance c;
    c.s0 = m.s0;
    c.n_eff = m.n_eff;
    c.mu.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = data.point(i);
        for (std::size_t j = 0; j < d; ++j) c.mu[j] += m.weights[i] * p[j];
    }
    c.sigma = Mat(d, d);
    Vec delta(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = data.point(i);
        for (std::size_t j = 0; j < d; ++j) delta[j] = p[j] - c.mu[j];
        add_outer(c.sigma, m.weights[i], delta);
    }
    return c;
}

ConditionalCovariance conditional_covariance(const PointCloud& data, const Vec& x,
                                             double h, const Kernel& kernel) {
    return conditional_covariance(local_moments(data, x, h, kernel), data, x, h);
}

Mat population_conditional_covariance(const std::function<double(const Vec&)>& density,
                                      const Vec& x, double h, const Kernel& kernel,
                                      double tol) {
    const std::size_t d = x.size();
    if (d != kernel.dim)
        throw input_error("population_conditional_covariance: dimension mismatch");
    const Vec lo(d, -8.0), hi(d, 8.0);

    auto weighted = [&](const std::function<double(const Vec&)>& factor) {
        const QuadResult r = integrate_box(
            [&](const Vec& z) {
                double y = 0.0;
                Vec p(d);
                for (std::size_t j = 0; j < d; ++j) {
                    y += z[j] * z[j];
                    p[j] = x[j] + h * z[j];
                }
                return kernel.normalization * kernel.profile(y) * density(p) *
                       factor(z);
            },
            lo, hi, tol);
        if (!r.converged)
            throw error("population_conditional_covariance: quadrature did not converge");
        return r.value;
    };

    const double s = weighted([](const Vec&) { return 1.0; });
    if (!(s > moment_floor)) throw_empty(x, h);

    Vec v(d);
    for (std::size_t j = 0; j < d; ++j)
        v[j] = weighted([j](const Vec& z) { return z[j]; });

    Mat sigma(d, d);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t l = j; l < d; ++l) {
            const double sjl = weighted([j, l](const Vec& z) { return z[j] * z[l]; });
            sigma(j, l) = sigma(l, j) = h * h * (sjl / s - v[j] * v[l] / (s * s));
        }
    return sigma;
}

} // namespace ridge
