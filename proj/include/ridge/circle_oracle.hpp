#pragma once

#include <cstdint>

#include "ridge/linalg.hpp"
#include "ridge/pointcloud.hpp"

// Ground truth for the circle benchmark: data drawn as a uniform angle on a
// radius-r circle plus isotropic Gaussian noise.  The density, its ridge
// radius, and the Hausdorff distance used to score estimates are all exact
// (up to bisection/series tolerances), which is what makes this family a
// useful oracle.

namespace ridge {

// log I0(t), the modified Bessel function of order zero; t >= 0.
double log_bessel_i0(double t);

// nu(t) = t * I0(t) / I1(t); strictly increasing, nu(0+) = 2.
double bessel_nu(double t);

// Density of r*(cos U, sin U) + sigma * Z at x:
//   f(x) = (2 pi sigma^2)^{-1} I0(r ||x|| / sigma^2)
//          exp(-(r^2 + ||x||^2) / (2 sigma^2)).
double circle_density(double r, double sigma, const Vec& x);

// Radius of the density ridge: 0 iff r/sigma <= sqrt(2), otherwise the unique
// root t of nu(r t / sigma^2) = r^2 / sigma^2 located by bisection to 1e-10.
double true_ridge_radius(double r, double sigma);

// n noisy circle points, reproducible bit-for-bit from the seed.
PointCloud sample_circle(std::size_t n, double r, double sigma, std::uint64_t seed);

// Exact symmetric Hausdorff distance between two point sets.
double hausdorff(const PointCloud& a, const PointCloud& b);
double hausdorff_serial(const PointCloud& a, const PointCloud& b);

} // namespace ridge
