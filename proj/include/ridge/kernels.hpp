#pragma once

#include <cstddef>
#include <string>

#include "ridge/linalg.hpp"

// Radial smoothing kernels.  A kernel is a normalized profile: K(z) =
// c * k(||z||^2), so rotational and sign symmetry hold by construction and
// hot loops only ever evaluate the scalar profile.  The shadow kernel
// g = -k' is what mean-shift weights come from; for the Gaussian the shadow
// coincides with the kernel itself.

namespace ridge {

using Profile = double (*)(double); // y = ||z||^2  ->  profile value

struct Kernel {
    std::size_t dim = 0;
    Profile profile = nullptr;        // k(y)
    Profile shadow_profile = nullptr; // g(y) = -k'(y); null if not provided
    double normalization = 0.0;       // c so that K integrates to 1
};

struct ShadowKernel {
    std::size_t dim = 0;
    Profile profile = nullptr;
    double normalization = 0.0;
};

// The standard d-dimensional Gaussian kernel: k(y) = exp(-y/2),
// c = (2*pi)^(-d/2).
Kernel gaussian_kernel(std::size_t d);

// Normalized shadow kernel of `k`.  Requires a shadow profile; the Gaussian
// normalization is closed-form, other profiles are normalized by quadrature.
ShadowKernel shadow_kernel(const Kernel& k);

// K_h(z) = h^{-d} K(z / h).
double kernel_eval(const Kernel& k, const Vec& z, double h);

enum class CheckState { pass, fail, undetermined };

// Moment and shape conditions a kernel must satisfy for the local-moment
// machinery to mean what the estimators assume it means:
//   K0  integrates to one
//   K1  invariant under coordinate signs and permutations
//   K2  identity second-moment matrix
//   K3  fourth moments mu4 = 3, mu22 = 1
//   K4  rotationally symmetric
//   K5  log-concave with curvature bounded away from zero
struct ConditionReport {
    CheckState k0, k1, k2, k3, k4, k5;

    double integral = 0.0;            // measured for K0
    double sign_perm_violation = 0.0; // max deviation for K1
    double covariance_deviation = 0.0;
    double mu4 = 0.0;
    double mu22 = 0.0; // NaN when d == 1
    double rotation_violation = 0.0;
    double max_log_curvature = 0.0; // largest eigenvalue of D^2 log K seen

    // K5 is verified numerically on a compact grid; the grid is recorded so
    // the report states exactly what was checked.
    double k5_grid_lo = 0.0, k5_grid_hi = 0.0;
    std::size_t k5_grid_points = 0;
    double k5_bound = 0.0; // required: max_log_curvature <= -k5_bound

    bool all_pass() const {
        return k0 == CheckState::pass && k1 == CheckState::pass &&
               k2 == CheckState::pass && k3 == CheckState::pass &&
               k4 == CheckState::pass && k5 == CheckState::pass;
    }
};

// Run all condition checks with the given moment tolerance (quadrature over
// [-8, 8]^d; d <= 3).  Non-converged quadrature yields `undetermined`, never
// a silent pass.
ConditionReport verify_kernel_conditions(const Kernel& k, double tol = 1e-6);

std::string to_string(CheckState s);

} // namespace ridge
