#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "ridge/circle_oracle.hpp"
#include "ridge/errors.hpp"
#include "ridge/kernels.hpp"
#include "ridge/local_moments.hpp"
#include "ridge/rng.hpp"
#include "ridge/symmetric_eigen.hpp"

using namespace ridge;

namespace {

Mat random_symmetric(std::size_t d, const CounterRng& rng, std::uint64_t base,
                     double scale = 1.0)
{
    Mat m(d, d);
    std::uint64_t k = base;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            const double v = scale * (2.0 * rng.uniform(k++) - 1.0);
            m(i, j) = m(j, i) = v;
        }
    return m;
}

double reconstruction_error(const Mat& m, const SpectralDecomposition& dec)
{
    const std::size_t d = m.rows();
    Mat rec(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        Vec col(d);
        for (std::size_t i = 0; i < d; ++i) col[i] = dec.vectors(i, j);
        add_outer(rec, dec.eigenvalues[j], col);
    }
    return frobenius_norm(rec - m);
}

double orthonormality_error(const SpectralDecomposition& dec)
{
    const std::size_t d = dec.eigenvalues.size();
    double worst = 0.0;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) s += dec.vectors(i, a) * dec.vectors(i, b);
            worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
        }
    return worst;
}

} // namespace

TEST_CASE("diagonal matrix decomposes exactly")
{
    Mat m(2, 2);
    m(0, 0) = 3.0;
    m(1, 1) = 1.0;
    const SpectralDecomposition dec = spectral(m);
    CHECK(dec.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(dec.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
    // Sign convention: leading component positive, so the columns are
    // exactly e1 and e2.
    CHECK(dec.vectors(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(dec.vectors(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(dec.vectors(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(eigengap(dec, 1) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("degenerate spectrum keeps the invariants")
{
    const SpectralDecomposition dec = spectral(Mat::identity(3));
    for (double ev : dec.eigenvalues) CHECK(ev == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(orthonormality_error(dec) < 1e-10);
    CHECK(reconstruction_error(Mat::identity(3), dec) < 1e-10);
}

TEST_CASE("random symmetric matrices reconstruct")
{
    const CounterRng rng(11);
    for (std::uint64_t t = 0; t < 50; ++t) {
        const Mat m = random_symmetric(4, rng, 1000 * t);
        const SpectralDecomposition dec = spectral(m);
        const double scale = std::max(frobenius_norm(m), 1e-30);
        CHECK(reconstruction_error(m, dec) <= 1e-8 * scale);
        CHECK(orthonormality_error(dec) < 1e-10);
        for (std::size_t j = 0; j + 1 < 4; ++j)
            CHECK(dec.eigenvalues[j] >= dec.eigenvalues[j + 1] - 1e-12 * scale);
    }
}

TEST_CASE("decomposition is deterministic")
{
    const CounterRng rng(12);
    const Mat m = random_symmetric(3, rng, 0);
    const SpectralDecomposition a = spectral(m);
    const SpectralDecomposition b = spectral(m);
    CHECK(a.eigenvalues == b.eigenvalues);
    CHECK(a.vectors == b.vectors);
}

TEST_CASE("spectral rejects bad input")
{
    Mat asym(2, 2);
    asym(0, 1) = 1.0; // strongly asymmetric
    CHECK_THROWS_AS(spectral(asym), input_error);

    Mat nan(2, 2);
    nan(0, 0) = std::nan("");
    CHECK_THROWS_AS(spectral(nan), input_error);

    CHECK_THROWS_AS(spectral(Mat::identity(9)), input_error); // d > 8
}

TEST_CASE("v_perp splits the basis")
{
    Mat m(2, 2);
    m(0, 0) = 3.0;
    m(1, 1) = 1.0;
    const SpectralDecomposition dec = spectral(m);

    const Mat tail = v_perp(dec, 1);
    CHECK(tail.rows() == 2);
    CHECK(tail.cols() == 1);
    CHECK(std::abs(tail(1, 0)) == doctest::Approx(1.0).epsilon(1e-14)); // span{e2}
    CHECK(std::abs(tail(0, 0)) == doctest::Approx(0.0).epsilon(1e-14));

    CHECK(v_perp(dec, 0) == dec.vectors); // no split

    CHECK_THROWS_AS(v_perp(dec, 2), input_error);
}

TEST_CASE("v_perp of a rotated diagonal matrix is the rotated axis")
{
    const double theta = 0.73;
    const double c = std::cos(theta), s = std::sin(theta);
    // R diag(2,1) R^T
    Mat m(2, 2);
    m(0, 0) = 2.0 * c * c + s * s;
    m(0, 1) = m(1, 0) = c * s; // (2-1) c s
    m(1, 1) = 2.0 * s * s + c * c;
    const SpectralDecomposition dec = spectral(m);
    const Mat tail = v_perp(dec, 1);
    // The trailing eigenvector spans the rotated second axis (-sin, cos).
    const double align = std::abs(-s * tail(0, 0) + c * tail(1, 0));
    CHECK(align == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("subspace distance basics")
{
    Mat a(2, 2);
    a(0, 0) = 3.0;
    a(1, 1) = 1.0;
    const SpectralDecomposition da = spectral(a);
    CHECK(subspace_distance(da, da, 1) == doctest::Approx(0.0).epsilon(1e-14));

    // Swapped diagonal: the trailing subspaces are perpendicular lines, and
    // the Frobenius distance of their projectors is sqrt(2).
    Mat b(2, 2);
    b(0, 0) = 1.0;
    b(1, 1) = 3.0;
    const SpectralDecomposition db = spectral(b);
    CHECK(subspace_distance(da, db, 1) ==
          doctest::Approx(std::numbers::sqrt2).epsilon(1e-12));

    const SpectralDecomposition d3 = spectral(Mat::identity(3));
    CHECK_THROWS_AS(subspace_distance(da, d3, 1), input_error);
}

TEST_CASE("weyl inequalities hold on random pairs")
{
    const CounterRng rng(13);
    for (std::uint64_t t = 0; t < 500; ++t) {
        const std::size_t d = 2 + t % 3;
        const Mat a = random_symmetric(d, rng, 10000 * t);
        const Mat b = random_symmetric(d, rng, 10000 * t + 5000, 2.0);
        const Vec la = spectral(a).eigenvalues;
        const Vec lb = spectral(b).eigenvalues;
        const Vec lab = spectral(a + b).eigenvalues;
        const double slack = 1e-9 * (frobenius_norm(a) + frobenius_norm(b) + 1.0);
        for (std::size_t j = 0; j < d; ++j) {
            CHECK(lab[j] >= la[j] + lb[d - 1] - slack);
            CHECK(lab[j] <= la[j] + lb[0] + slack);
        }
    }
}

TEST_CASE("davis-kahan bound holds with an enforced eigengap")
{
    const CounterRng rng(14);
    std::size_t tested = 0;
    for (std::uint64_t t = 0; t < 500; ++t) {
        const std::size_t d = 2 + t % 3;
        const std::size_t s = 1 + t % (d - 1 > 0 ? d - 1 : 1);
        // A gets a deliberate spectral gap at position s; B is a perturbation.
        Mat a = random_symmetric(d, rng, 20000 * t);
        for (std::size_t i = 0; i < s; ++i) a(i, i) += 6.0;
        const Mat b = a + random_symmetric(d, rng, 20000 * t + 7777, 0.3);
        const SpectralDecomposition da = spectral(a);
        const SpectralDecomposition db = spectral(b);
        const double delta = da.eigenvalues[s - 1] - db.eigenvalues[s];
        if (delta <= 0.0) continue;
        ++tested;
        const double bound =
            std::numbers::sqrt2 * frobenius_norm(a - b) / delta + 1e-9;
        CHECK(subspace_distance(da, db, s) <= bound);
    }
    CHECK(tested >= 400); // the gap construction succeeds essentially always
}

namespace {

// Centered finite-difference Hessian of log density at (x0, x1).
Mat fd_log_hessian(const std::function<double(const Vec&)>& density, double x0,
                   double x1, double e = 1e-4)
{
    auto lf = [&](double u, double v) { return std::log(density(Vec{u, v})); };
    Mat hess(2, 2);
    hess(0, 0) = (lf(x0 + e, x1) - 2.0 * lf(x0, x1) + lf(x0 - e, x1)) / (e * e);
    hess(1, 1) = (lf(x0, x1 + e) - 2.0 * lf(x0, x1) + lf(x0, x1 - e)) / (e * e);
    hess(0, 1) = hess(1, 0) = (lf(x0 + e, x1 + e) - lf(x0 + e, x1 - e) -
                               lf(x0 - e, x1 + e) + lf(x0 - e, x1 - e)) /
                              (4.0 * e * e);
    return hess;
}

} // namespace

TEST_CASE("conditional covariance directions match the log-density hessian")
{
    // At a ridge point of the circle density, both the population
    // conditional covariance and D^2 log f are exactly diagonal in the
    // radial/tangential frame (rotational symmetry), with matching
    // eigenvalue order, so the trailing subspaces coincide at every h --
    // the convergence statement holds with distance identically zero.
    const double r = 1.0, sigma = 0.1;
    const double t = true_ridge_radius(r, sigma);
    auto density = [&](const Vec& z) { return circle_density(r, sigma, z); };
    const SpectralDecomposition dh = spectral(fd_log_hessian(density, t, 0.0));

    const Kernel kern = gaussian_kernel(2);
    for (double h : {0.4, 0.2, 0.1}) {
        const Mat sig = population_conditional_covariance(density, Vec{t, 0.0}, h, kern);
        CHECK(subspace_distance(spectral(sig), dh, 1) < 1e-6);
    }
}

TEST_CASE("subspace convergence is strict once the symmetry is broken")
{
    // A skewed (non-normalized) positive weight makes the eigenvectors of
    // the conditional covariance genuinely rotate with h; normalization is
    // irrelevant because the covariance is built from moment ratios.
    const double r = 1.0, sigma = 0.3;
    auto density = [&](const Vec& z) {
        return circle_density(r, sigma, z) * std::exp(0.5 * z[0] * z[1]);
    };
    const double x0 = 0.9, x1 = 0.2;
    const SpectralDecomposition dh = spectral(fd_log_hessian(density, x0, x1));

    const Kernel kern = gaussian_kernel(2);
    double prev = kInfinity;
    for (double h : {0.4, 0.2, 0.1}) {
        const Mat sig =
            population_conditional_covariance(density, Vec{x0, x1}, h, kern);
        const double dist = subspace_distance(spectral(sig), dh, 1);
        CHECK(dist < prev);
        prev = dist;
    }
    CHECK(prev < 0.05); // and the limit is the hessian's trailing space
}
