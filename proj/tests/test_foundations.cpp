#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ridge/linalg.hpp"
#include "ridge/normal.hpp"
#include "ridge/quadrature.hpp"
#include "ridge/rng.hpp"

using namespace ridge;

TEST_CASE("counter rng is a pure function of seed and index")
{
    CounterRng a(42), b(42), c(43);
    for (std::uint64_t i = 0; i < 100; ++i) {
        CHECK(a.uniform(i) == b.uniform(i));
        CHECK(a.uniform(i) > 0.0);
        CHECK(a.uniform(i) < 1.0);
    }
    // Different seeds produce different streams (overwhelmingly likely on
    // any index; check a fixed one).
    CHECK(a.uniform(7) != c.uniform(7));
    // Order of evaluation is irrelevant by construction.
    const double late = a.uniform(99);
    const double early = a.uniform(0);
    CHECK(late == b.uniform(99));
    CHECK(early == b.uniform(0));
}

TEST_CASE("counter rng normals have roughly standard moments")
{
    CounterRng rng(2024);
    const std::size_t n = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = rng.normal(i);
        sum += z;
        sumsq += z * z;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    // 3-sigma bands: se(mean) ~ 1/sqrt(n), se(var) ~ sqrt(2/n).
    CHECK(std::abs(mean) < 3.0 / std::sqrt(double(n)));
    CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("substreams are decoupled from the parent stream")
{
    CounterRng rng(7);
    CounterRng sub = rng.substream(1);
    CHECK(sub.seed() != rng.seed());
    CHECK(rng.substream(1).seed() == sub.seed()); // deterministic derivation
    CHECK(rng.substream(2).seed() != sub.seed());
}

TEST_CASE("normal pdf and cdf reference values")
{
    CHECK(normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi))
                                 .epsilon(1e-14));
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-8.0) == doctest::Approx(6.22096e-16).epsilon(1e-3));
}

TEST_CASE("log_sub_exp matches direct evaluation away from cancellation")
{
    CHECK(log_sub_exp(std::log(3.0), std::log(1.0)) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
    // a - b tiny: direct evaluation would cancel, the log form must not.
    const double a = 1e3, b = a - 1e-9;
    CHECK(log_sub_exp(a, b) == doctest::Approx(a + std::log(1e-9)).epsilon(1e-6));
}

TEST_CASE("log_normal_tail agrees with erfc where erfc is healthy")
{
    for (double t : {0.0, 1.0, 5.0, 20.0, 35.0}) {
        const double direct = std::log(0.5 * std::erfc(t / std::numbers::sqrt2));
        CHECK(log_normal_tail(t) == doctest::Approx(direct).epsilon(1e-12));
    }
    // Deep tail: finite, decreasing, and close to the leading asymptotic
    // -t^2/2 - log(t sqrt(2 pi)).
    const double t = 60.0;
    const double lead = -0.5 * t * t - 0.5 * log_2pi - std::log(t);
    CHECK(std::isfinite(log_normal_tail(t)));
    CHECK(log_normal_tail(t) == doctest::Approx(lead).epsilon(1e-3));
    CHECK(log_normal_tail(61.0) < log_normal_tail(60.0));
}

TEST_CASE("log_normal_cdf_diff is stable in far tails and exact centrally")
{
    // Central: direct difference of cdfs.
    const double direct = std::log(normal_cdf(1.0) - normal_cdf(-0.5));
    CHECK(log_normal_cdf_diff(-0.5, 1.0) == doctest::Approx(direct).epsilon(1e-12));
    // Same far-right tail: cdf differences cancel to zero in doubles, the
    // log form must survive.  Oracle: Q(l) - Q(r) via the tail logs.
    const double l = 40.0, r = 41.0;
    const double oracle = log_sub_exp(log_normal_tail(l), log_normal_tail(r));
    CHECK(std::isfinite(log_normal_cdf_diff(l, r)));
    CHECK(log_normal_cdf_diff(l, r) == doctest::Approx(oracle).epsilon(1e-12));
    // Mirror symmetry of the standard normal.
    CHECK(log_normal_cdf_diff(-41.0, -40.0) ==
          doctest::Approx(log_normal_cdf_diff(40.0, 41.0)).epsilon(1e-12));
    // Degenerate interval.
    CHECK(log_normal_cdf_diff(2.0, 2.0) == -kInfinity);
}

TEST_CASE("quadrature is exact on polynomials within the Gauss degree")
{
    auto r1 = integrate([](double) { return 1.0; }, -3.0, 5.0, 1e-12);
    CHECK(r1.converged);
    CHECK(r1.value == doctest::Approx(8.0).epsilon(1e-15));
    auto r2 = integrate([](double x) { return x * x; }, 0.0, 2.0, 1e-12);
    CHECK(r2.converged);
    CHECK(r2.value == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    auto r3 = integrate([](double x) { return std::pow(x, 7); }, -1.0, 2.0, 1e-12);
    CHECK(r3.converged);
    CHECK(r3.value == doctest::Approx((256.0 - 1.0) / 8.0).epsilon(1e-13));
}

TEST_CASE("quadrature handles the Gaussian and a hard exponential")
{
    auto g = integrate([](double x) { return normal_pdf(x); }, -10.0, 10.0, 1e-12);
    CHECK(g.converged);
    CHECK(g.value == doctest::Approx(1.0).epsilon(1e-12));
    auto e = integrate([](double x) { return std::exp(-std::abs(x)); }, -20.0, 20.0,
                       1e-10);
    CHECK(e.converged);
    CHECK(e.value == doctest::Approx(2.0 * (1.0 - std::exp(-20.0))).epsilon(1e-10));
}

TEST_CASE("quadrature resolves a step discontinuity")
{
    // Jump at an irrational point so no node or cell boundary ever lands on
    // it exactly.
    const double c = std::numbers::sqrt2 / 2.0;
    auto r = integrate([&](double x) { return x < c ? 1.0 : 0.0; }, 0.0, 4.0, 1e-9);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(c).epsilon(1e-9));
}

TEST_CASE("quadrature sees a feature far narrower than the interval")
{
    // A bump of width ~0.2 on a length-16 interval leaves no trace on a
    // single 15-node panel; the fixed initial partition must catch it.
    auto r = integrate([](double x) { return normal_pdf((x - 0.3) / 0.1) / 0.1; },
                       -8.0, 8.0, 1e-9);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("quadrature reports rather than hides non-convergence")
{
    // 1/sqrt(x) is integrable but its estimate cannot reach 1e-14 within a
    // 10-level depth budget; converged must come back false, and the value
    // and error must still be finite and sane.
    auto r = integrate([](double x) { return 1.0 / std::sqrt(x + 1e-300); }, 0.0, 1.0,
                       1e-14, 10);
    CHECK_FALSE(r.converged);
    CHECK(std::isfinite(r.value));
    CHECK(r.error > 1e-14);
}

TEST_CASE("box quadrature integrates separable and radial densities")
{
    Vec lo{-8.0, -8.0}, hi{8.0, 8.0};
    auto g2 = integrate_box(
        [](const Vec& z) { return normal_pdf(z[0]) * normal_pdf(z[1]); }, lo, hi, 1e-9);
    CHECK(g2.converged);
    CHECK(g2.value == doctest::Approx(1.0).epsilon(1e-9));

    // Indicator of the unit disk: area pi, discontinuous along a curve no
    // tensor grid aligns with.
    auto disk = integrate_box(
        [](const Vec& z) {
            return z[0] * z[0] + z[1] * z[1] <= 1.0 ? 1.0 : 0.0;
        },
        lo, hi, 1e-3);
    CHECK(disk.converged);
    CHECK(disk.value == doctest::Approx(std::numbers::pi).epsilon(1e-3));
}

TEST_CASE("box quadrature catches mass invisible to the initial grid")
{
    // x^4 times the disk indicator vanishes at every node of the first
    // tensor panel over [-8,8]^2 (the only node with |x|<1 is x=0, killed by
    // x^4), so a naive adaptive scheme returns 0 "converged".
    Vec lo{-8.0, -8.0}, hi{8.0, 8.0};
    auto mu4 = integrate_box(
        [](const Vec& z) {
            const double in = z[0] * z[0] + z[1] * z[1] <= 1.0 ? 1.0 : 0.0;
            return in * z[0] * z[0] * z[0] * z[0] / std::numbers::pi;
        },
        lo, hi, 1e-3);
    CHECK(mu4.converged);
    CHECK(mu4.value == doctest::Approx(0.125).epsilon(5e-3));
}

TEST_CASE("vector and matrix helpers")
{
    Vec x{1.0, 2.0, 3.0}, y{4.0, -5.0, 6.0};
    CHECK(dot(x, y) == doctest::Approx(12.0));
    CHECK(norm(Vec{3.0, 4.0}) == doctest::Approx(5.0));
    CHECK(dist(x, y) == doctest::Approx(std::sqrt(9.0 + 49.0 + 9.0)));

    Vec z = x;
    axpy(2.0, y, z); // z = 2y + x
    CHECK(z == Vec{9.0, -8.0, 15.0});

    Mat a(2, 2);
    a(0, 0) = 1.0; a(0, 1) = 2.0;
    a(1, 0) = 3.0; a(1, 1) = 4.0;
    Mat b = Mat::identity(2);
    CHECK(mat_mul(a, b) == a);
    Vec av = mat_vec(a, Vec{1.0, 1.0});
    CHECK(av == Vec{3.0, 7.0});

    Mat outer(2, 2);
    add_outer(outer, 2.0, Vec{1.0, -1.0});
    CHECK(outer(0, 0) == doctest::Approx(2.0));
    CHECK(outer(0, 1) == doctest::Approx(-2.0));
    CHECK(outer(1, 1) == doctest::Approx(2.0));

    CHECK(frobenius_norm(Mat::identity(3)) == doctest::Approx(std::sqrt(3.0)));
    Mat m(2, 2);
    m(0, 1) = -7.0;
    CHECK(max_abs(m) == doctest::Approx(7.0));
}
