#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "ridge/circle_oracle.hpp"
#include "ridge/errors.hpp"
#include "ridge/kernels.hpp"
#include "ridge/local_moments.hpp"
#include "ridge/quadrature.hpp"
#include "ridge/rng.hpp"

using namespace ridge;

namespace {

PointCloud gaussian_cloud(std::size_t n, double sd0, double sd1, std::uint64_t seed) {
    CounterRng rng(seed);
    PointCloud pc;
    pc.d = 2;
    for (std::size_t i = 0; i < n; ++i) {
        double z0, z1;
        rng.normal_pair(i, z0, z1);
        pc.push_back({sd0 * z0, sd1 * z1});
    }
    return pc;
}

// Centered finite-difference Hessian of log f.
Mat fd_log_hessian(const std::function<double(const Vec&)>& f, const Vec& x) {
    const double e = 1e-4;
    const std::size_t d = x.size();
    auto lf = [&](const Vec& p) { return std::log(f(p)); };
    Mat h(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            Vec pp = x, pm = x, mp = x, mm = x;
            pp[i] += e;
            pp[j] += e;
            pm[i] += e;
            pm[j] -= e;
            mp[i] -= e;
            mp[j] += e;
            mm[i] -= e;
            mm[j] -= e;
            h(i, j) = h(j, i) = (lf(pp) - lf(pm) - lf(mp) + lf(mm)) / (4 * e * e);
        }
    return h;
}

double sample_sd(const Vec& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

} // namespace

TEST_CASE("single point at the query: zeroth moment is the kernel peak") {
    const Kernel k = gaussian_kernel(2);
    const double h = 0.7;
    PointCloud pc;
    pc.d = 2;
    pc.push_back({0.4, -1.2});

    const LocalMoments m = local_moments(pc, {0.4, -1.2}, h, k);
    // K_h(0) = h^{-d} (2 pi)^{-d/2}
    const double peak = std::pow(h, -2.0) / (2.0 * std::numbers::pi);
    CHECK(m.s0 == doctest::Approx(peak).epsilon(1e-14));
    CHECK(m.s1[0] == 0.0);
    CHECK(m.s1[1] == 0.0);
    CHECK(max_abs(m.s2) == 0.0);
    REQUIRE(m.weights.size() == 1);
    CHECK(m.weights[0] == 1.0);
    CHECK(m.n_eff == doctest::Approx(1.0));

    const ConditionalCovariance c = conditional_covariance(pc, {0.4, -1.2}, h, k);
    CHECK(c.mu[0] == doctest::Approx(0.4));
    CHECK(c.mu[1] == doctest::Approx(-1.2));
    CHECK(max_abs(c.sigma) == 0.0);
}

TEST_CASE("symmetric pair: first moment cancels, covariance is the offset square") {
    const Kernel k = gaussian_kernel(2);
    const Vec x{1.0, 2.0};
    const double a = 0.37, h = 0.9;
    PointCloud pc;
    pc.d = 2;
    pc.push_back({x[0] + a, x[1]});
    pc.push_back({x[0] - a, x[1]});

    const LocalMoments m = local_moments(pc, x, h, k);
    CHECK(std::abs(m.s1[0]) < 1e-16);
    CHECK(std::abs(m.s1[1]) < 1e-16);
    CHECK(m.weights[0] == doctest::Approx(0.5));
    CHECK(m.n_eff == doctest::Approx(2.0));
    // s2 = s0 * diag(a^2/h^2, 0) since both points share the same |offset|.
    CHECK(m.s2(0, 0) == doctest::Approx(m.s0 * a * a / (h * h)).epsilon(1e-12));
    CHECK(m.s2(1, 1) == 0.0);

    const ConditionalCovariance c = conditional_covariance(pc, x, h, k);
    CHECK(c.mu[0] == doctest::Approx(x[0]).epsilon(1e-14));
    CHECK(c.mu[1] == doctest::Approx(x[1]).epsilon(1e-14));
    CHECK(c.sigma(0, 0) == doctest::Approx(a * a).epsilon(1e-12));
    CHECK(std::abs(c.sigma(0, 1)) < 1e-15);
    CHECK(std::abs(c.sigma(1, 1)) < 1e-15);
}

TEST_CASE("zeroth moment estimates the expected kernel value under the density") {
    const Kernel k = gaussian_kernel(2);
    const double h = 0.5;
    const std::size_t n = 1000;
    const PointCloud pc = gaussian_cloud(n, 1.0, 1.0, 42);
    const Vec x{0.0, 0.0};

    const LocalMoments m = local_moments(pc, x, h, k);

    // E K_h(X) for X ~ N(0, I) by quadrature, cross-checked against the
    // closed-form Gaussian convolution (2 pi (1 + h^2))^{-1}.
    const QuadResult q = integrate_box(
        [&](const Vec& z) {
            const double y = z[0] * z[0] + z[1] * z[1];
            return kernel_eval(k, z, h) * std::exp(-0.5 * y) /
                   (2.0 * std::numbers::pi);
        },
        {-8.0, -8.0}, {8.0, 8.0}, 1e-8);
    REQUIRE(q.converged);
    CHECK(q.value ==
          doctest::Approx(1.0 / (2.0 * std::numbers::pi * (1.0 + h * h))).epsilon(1e-7));

    Vec kvals(n);
    for (std::size_t i = 0; i < n; ++i)
        kvals[i] = kernel_eval(k, pc.point_vec(i), h);
    const double se = sample_sd(kvals) / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(m.s0 - q.value) <= 3.0 * se);
}

TEST_CASE("degenerate clouds: single point and a line collapse the covariance") {
    const Kernel k = gaussian_kernel(2);
    PointCloud one;
    one.d = 2;
    one.push_back({2.0, 3.0});
    const ConditionalCovariance c1 = conditional_covariance(one, {1.5, 3.0}, 0.8, k);
    CHECK(c1.mu[0] == doctest::Approx(2.0));
    CHECK(c1.mu[1] == doctest::Approx(3.0));
    CHECK(max_abs(c1.sigma) == 0.0);

    // Points on the x-axis: the covariance has rank one, second axis exactly 0.
    PointCloud line;
    line.d = 2;
    for (double t : {-0.9, -0.3, 0.1, 0.4, 1.1}) line.push_back({t, 0.0});
    const ConditionalCovariance cl = conditional_covariance(line, {0.0, 0.0}, 0.6, k);
    CHECK(cl.sigma(0, 0) > 0.0);
    CHECK(cl.sigma(0, 1) == 0.0);
    CHECK(cl.sigma(1, 1) == 0.0);
}

TEST_CASE("anisotropic gaussian sample matches the shrunk covariance within noise") {
    // X ~ N(0, diag(1, 0.25)), h = 0.5, x = 0: the weighted covariance
    // estimates (Sigma^{-1} + h^{-2} I)^{-1} = diag(0.2, 0.125).
    const Kernel k = gaussian_kernel(2);
    const double h = 0.5;
    const std::size_t n = 20000;
    const PointCloud pc = gaussian_cloud(n, 1.0, 0.5, 7);
    const Vec x{0.0, 0.0};

    const ConditionalCovariance full = conditional_covariance(pc, x, h, k);

    // Monte Carlo error bars from 10 disjoint batches of 2000.
    const std::size_t nb = 10, bs = n / nb;
    std::vector<Mat> batch(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        PointCloud part;
        part.d = 2;
        for (std::size_t i = b * bs; i < (b + 1) * bs; ++i)
            part.push_back(pc.point_vec(i));
        batch[b] = conditional_covariance(part, x, h, k).sigma;
    }
    const Mat oracle = [] {
        Mat m(2, 2);
        m(0, 0) = 0.2;
        m(1, 1) = 0.125;
        return m;
    }();
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            Vec entries(nb);
            for (std::size_t b = 0; b < nb; ++b) entries[b] = batch[b](i, j);
            const double se = sample_sd(entries) / std::sqrt(static_cast<double>(nb));
            CHECK(std::abs(full.sigma(i, j) - oracle(i, j)) <= 5.0 * se);
        }
}

TEST_CASE("population covariance of a gaussian is the exact shrinkage formula") {
    const Kernel k = gaussian_kernel(2);
    const double h = 0.5;
    auto density = [](const Vec& z) {
        // N(0, diag(1, 0.25))
        return std::exp(-0.5 * (z[0] * z[0] + z[1] * z[1] / 0.25)) /
               (2.0 * std::numbers::pi * 0.5);
    };
    // (Sigma^{-1} + h^{-2} I)^{-1} is independent of the query point.
    for (const Vec& x : {Vec{0.0, 0.0}, Vec{0.3, -0.2}}) {
        const Mat sigma = population_conditional_covariance(density, x, h, k);
        CHECK(sigma(0, 0) == doctest::Approx(0.2).epsilon(1e-6));
        CHECK(sigma(1, 1) == doctest::Approx(0.125).epsilon(1e-6));
        CHECK(std::abs(sigma(0, 1)) < 1e-6);
        CHECK(std::abs(sigma(1, 0)) < 1e-6);
    }
}

TEST_CASE("population covariance at a symmetry center is a multiple of the identity") {
    const Kernel k = gaussian_kernel(2);
    auto density = [](const Vec& z) { return circle_density(1.0, 0.3, z); };
    const Mat sigma = population_conditional_covariance(density, {0.0, 0.0}, 0.4, k);
    CHECK(sigma(0, 0) > 0.0);
    CHECK(sigma(0, 0) == doctest::Approx(sigma(1, 1)).epsilon(1e-8));
    CHECK(std::abs(sigma(0, 1)) < 1e-8);
}

TEST_CASE("small-bandwidth expansion approaches the log-density hessian") {
    // || h^{-4} (Sigma_h - h^2 I) - D^2 log f ||_F shrinks as h -> 0.
    const Kernel k = gaussian_kernel(2);
    auto density = [](const Vec& z) { return circle_density(1.0, 0.3, z); };
    const double t = true_ridge_radius(1.0, 0.3);
    const Vec x{t, 0.0};
    const Mat hess = fd_log_hessian(density, x);

    Vec errs;
    for (double h : {0.4, 0.2, 0.1}) {
        const Mat sigma = population_conditional_covariance(density, x, h, k);
        Mat dev(2, 2);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                dev(i, j) =
                    (sigma(i, j) - (i == j ? h * h : 0.0)) / (h * h * h * h) -
                    hess(i, j);
        errs.push_back(frobenius_norm(dev));
    }
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);
    CHECK(errs[2] < 1.5);
}

TEST_CASE("translation equivariance: shifting data and query shifts only the mean") {
    const Kernel k = gaussian_kernel(2);
    const PointCloud pc = gaussian_cloud(60, 1.0, 0.7, 11);
    const Vec x{0.2, -0.1}, v{3.5, -1.25};

    PointCloud shifted;
    shifted.d = 2;
    for (std::size_t i = 0; i < pc.n; ++i)
        shifted.push_back(pc.point_vec(i) + v);

    const ConditionalCovariance a = conditional_covariance(pc, x, 0.4, k);
    const ConditionalCovariance b = conditional_covariance(shifted, x + v, 0.4, k);
    CHECK(a.s0 == doctest::Approx(b.s0).epsilon(1e-12));
    CHECK(frobenius_norm(a.sigma - b.sigma) < 1e-12);
    CHECK(norm(b.mu - (a.mu + v)) < 1e-12);
    CHECK(a.n_eff == doctest::Approx(b.n_eff).epsilon(1e-12));
}

TEST_CASE("scale equivariance: scaling data, query and bandwidth together") {
    const Kernel k = gaussian_kernel(2);
    const PointCloud pc = gaussian_cloud(60, 1.0, 0.7, 12);
    const Vec x{0.2, -0.1};
    const double h = 0.4, c = 2.5;

    PointCloud scaled;
    scaled.d = 2;
    for (std::size_t i = 0; i < pc.n; ++i)
        scaled.push_back(c * pc.point_vec(i));

    const ConditionalCovariance a = conditional_covariance(pc, x, h, k);
    const ConditionalCovariance b = conditional_covariance(scaled, c * x, c * h, k);
    // K_{ch}(c z) = c^{-d} K_h(z), so s0 scales and the weights do not change.
    CHECK(b.s0 == doctest::Approx(a.s0 / (c * c)).epsilon(1e-12));
    CHECK(b.n_eff == doctest::Approx(a.n_eff).epsilon(1e-12));
    CHECK(norm(b.mu - c * a.mu) < 1e-12);
    CHECK(frobenius_norm(b.sigma - c * c * a.sigma) < 1e-10);
}

TEST_CASE("far query point raises the empty-neighborhood error") {
    const Kernel k = gaussian_kernel(2);
    const PointCloud pc = gaussian_cloud(50, 1.0, 1.0, 13);
    CHECK_THROWS_AS(local_moments(pc, {1e6, 1e6}, 0.3, k), empty_neighborhood_error);
    CHECK_THROWS_AS(conditional_covariance(pc, {1e6, 1e6}, 0.3, k),
                    empty_neighborhood_error);
}

TEST_CASE("input validation") {
    const Kernel k = gaussian_kernel(2);
    const PointCloud pc = gaussian_cloud(10, 1.0, 1.0, 14);
    PointCloud empty;
    empty.d = 2;
    CHECK_THROWS_AS(local_moments(empty, {0.0, 0.0}, 0.5, k), input_error);
    CHECK_THROWS_AS(local_moments(pc, {0.0, 0.0, 0.0}, 0.5, k), input_error);
    CHECK_THROWS_AS(local_moments(pc, {0.0, 0.0}, 0.0, k), input_error);
    CHECK_THROWS_AS(local_moments(pc, {0.0, 0.0}, -1.0, k), input_error);
    CHECK_THROWS_AS(local_moments(pc, {0.0}, 0.5, gaussian_kernel(1)), input_error);
    CHECK_THROWS_AS(
        population_conditional_covariance([](const Vec&) { return 1.0; }, {0.0}, 0.5, k),
        input_error);
}

TEST_CASE("covariance field is lipschitz with the moment-ratio constant") {
    // For a fixed sample, || Sigma(x) - Sigma(y) ||_F <= L ||x - y|| over the
    // convex hull, with L = 4 d M sqrt(Ltilde) / m^2 assembled from
    //   M      largest local moment (s0, h s1, h^2 s2 entries) seen,
    //   m      smallest zeroth moment seen,
    //   Ltilde kernel smoothness bound 3 ||K_h||_inf max(D,1)
    //          + max(D,1)^2 h^{-d-1} sup|grad K|.
    const Kernel k = gaussian_kernel(2);
    const double h = 0.3;
    const PointCloud pc = sample_circle(100, 1.0, 0.1, 5);
    const std::size_t d = 2;

    double diam = 0.0;
    for (std::size_t i = 0; i < pc.n; ++i)
        for (std::size_t j = i + 1; j < pc.n; ++j)
            diam = std::max(diam, dist(pc.point_vec(i), pc.point_vec(j)));

    const CounterRng rng(99);
    auto hull_point = [&](std::uint64_t i) {
        const std::size_t a =
            static_cast<std::size_t>(rng.uniform(3 * i) * static_cast<double>(pc.n));
        const std::size_t b =
            static_cast<std::size_t>(rng.uniform(3 * i + 1) * static_cast<double>(pc.n));
        const double t = rng.uniform(3 * i + 2);
        return pc.point_vec(a) + t * (pc.point_vec(b) - pc.point_vec(a));
    };

    const std::size_t pairs = 300;
    std::vector<Vec> xs(2 * pairs);
    std::vector<Mat> sigmas(2 * pairs);
    double big_m = 0.0, small_m = kInfinity;
    for (std::size_t i = 0; i < 2 * pairs; ++i) {
        xs[i] = hull_point(i);
        const LocalMoments lm = local_moments(pc, xs[i], h, k);
        sigmas[i] = conditional_covariance(lm, pc, xs[i], h).sigma;
        big_m = std::max(big_m, lm.s0);
        for (std::size_t j = 0; j < d; ++j) big_m = std::max(big_m, std::abs(h * lm.s1[j]));
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t l = 0; l < d; ++l)
                big_m = std::max(big_m, std::abs(h * h * lm.s2(j, l)));
        small_m = std::min(small_m, lm.s0);
    }
    REQUIRE(small_m > 0.0);

    const double dd = std::max(diam, 1.0);
    const double kinf = std::pow(h, -2.0) / (2.0 * std::numbers::pi);
    const double ginf =
        std::exp(-0.5) / (2.0 * std::numbers::pi); // sup of any |grad K| component
    const double ltilde = 3.0 * kinf * dd + dd * dd * std::pow(h, -3.0) * ginf;
    const double bound =
        4.0 * static_cast<double>(d) * big_m * std::sqrt(ltilde) / (small_m * small_m);
    REQUIRE(std::isfinite(bound));

    double worst = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
        const double gap = dist(xs[2 * p], xs[2 * p + 1]);
        if (gap < 1e-12) continue;
        const double ratio =
            frobenius_norm(sigmas[2 * p] - sigmas[2 * p + 1]) / (gap * bound);
        worst = std::max(worst, ratio);
        CHECK(ratio <= 1.0);
    }
    // The bound is loose by construction; make sure the test is not vacuous.
    CHECK(worst > 0.0);
    MESSAGE("lipschitz slack: worst empirical/bound ratio = ", worst);
}
