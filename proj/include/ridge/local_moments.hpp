#pragma once

#include <functional>

#include "ridge/kernels.hpp"
#include "ridge/linalg.hpp"
#include "ridge/pointcloud.hpp"

// Kernel-weighted local moments of a point cloud at a query point, and the
// conditional covariance built from them: the covariance of the data under
// the normalized kernel weights, which for bandwidth h behaves like
// h^2 I + h^4 D^2 log f(x) as h -> 0.

namespace ridge {

struct LocalMoments {
    double s0 = 0.0; // n^{-1} sum K_h(X_i - x): the KDE value at x
    Vec s1;          // n^{-1} sum K_h(X_i - x) (X_i - x)/h
    Mat s2;          // n^{-1} sum K_h(X_i - x) (X_i - x)(X_i - x)^T / h^2
    Vec weights;     // normalized kernel weights, sum exactly 1
    double n_eff = 0.0; // effective neighborhood size (sum w)^2 / sum w^2
};

// Weight floor: below this zeroth moment the neighborhood is declared empty.
inline constexpr double moment_floor = 1e-300;

LocalMoments local_moments(const PointCloud& data, const Vec& x, double h,
                           const Kernel& kernel);

struct ConditionalCovariance {
    Mat sigma;   // weighted covariance = h^2 (s2/s0 - s1 s1^T / s0^2)
    Vec mu;      // weighted mean of the data
    double s0 = 0.0;
    double n_eff = 0.0;
};

// Centered two-pass evaluation of the conditional covariance (one pass for
// the weighted mean, one for the covariance), numerically preferable to the
// raw-moment difference.
ConditionalCovariance conditional_covariance(const PointCloud& data, const Vec& x,
                                             double h, const Kernel& kernel);
ConditionalCovariance conditional_covariance(const LocalMoments& m,
                                             const PointCloud& data, const Vec& x,
                                             double h);

// Population analogue with the data distribution replaced by a density:
//   sigma_h(x) = h^2 ( S/s - v v^T / s^2 ),  s = int K(z) f(x+hz) dz, etc.
// Quadrature runs over z in [-8, 8]^d.
Mat population_conditional_covariance(const std::function<double(const Vec&)>& density,
                                      const Vec& x, double h, const Kernel& kernel,
                                      double tol = 1e-10);

} // namespace ridge
