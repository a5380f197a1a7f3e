#include "ridge/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ridge/errors.hpp"
#include "ridge/quadrature.hpp"
#include "ridge/rng.hpp"
#include "ridge/symmetric_eigen.hpp"

namespace ridge {

namespace {

double gauss_profile(double y) { return std::exp(-0.5 * y); }
double gauss_shadow_profile(double y) { return 0.5 * std::exp(-0.5 * y); }

double squared_norm(const Vec& z) {
    double s = 0.0;
    for (double v : z) s += v * v;
    return s;
}

double profile_at(const Kernel& k, const Vec& z) {
    return k.normalization * k.profile(squared_norm(z));
}

} // namespace

Kernel gaussian_kernel(std::size_t d) {
    if (d == 0) throw input_error("gaussian_kernel: dimension must be positive");
    Kernel k;
    k.dim = d;
    k.profile = gauss_profile;
    k.shadow_profile = gauss_shadow_profile;
    k.normalization = std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(d));
    return k;
}

ShadowKernel shadow_kernel(const Kernel& k) {
    if (!k.shadow_profile)
        throw input_error("shadow_kernel: kernel carries no shadow profile");
    ShadowKernel g;
    g.dim = k.dim;
    g.profile = k.shadow_profile;
    if (k.shadow_profile == gauss_shadow_profile) {
        // integral of (1/2) exp(-||z||^2/2) is (1/2)(2 pi)^{d/2}, so the
        // normalized shadow equals the Gaussian kernel itself.
        g.normalization =
            2.0 * std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(k.dim));
        return g;
    }
    const Vec lo(k.dim, -8.0), hi(k.dim, 8.0);
    const QuadResult mass = integrate_box(
        [&](const Vec& z) { return k.shadow_profile(squared_norm(z)); }, lo, hi, 1e-9);
    if (!mass.converged || mass.value <= 0.0)
        throw error("shadow_kernel: could not normalize shadow profile");
    g.normalization = 1.0 / mass.value;
    return g;
}

double kernel_eval(const Kernel& k, const Vec& z, double h) {
    if (z.size() != k.dim) throw input_error("kernel_eval: dimension mismatch");
    if (!(h > 0.0)) throw input_error("kernel_eval: bandwidth must be positive");
    double y = 0.0;
    for (double v : z) y += (v / h) * (v / h);
    return std::pow(h, -static_cast<double>(k.dim)) * k.normalization * k.profile(y);
}

namespace {

CheckState from_quad(const QuadResult& r, double deviation, double tol) {
    if (!r.converged) return CheckState::undetermined;
    return deviation <= tol ? CheckState::pass : CheckState::fail;
}

// Moment integral of z^alpha * K(z) over [-8,8]^d.
QuadResult moment(const Kernel& k, const std::vector<int>& alpha, double tol) {
    const Vec lo(k.dim, -8.0), hi(k.dim, 8.0);
    return integrate_box(
        [&](const Vec& z) {
            double m = profile_at(k, z);
            for (std::size_t i = 0; i < alpha.size(); ++i)
                for (int p = 0; p < alpha[i]; ++p) m *= z[i];
            return m;
        },
        lo, hi, tol);
}

} // namespace

ConditionReport verify_kernel_conditions(const Kernel& k, double tol) {
    if (k.dim > 3)
        throw input_error("verify_kernel_conditions: checks are supported for d <= 3");
    const std::size_t d = k.dim;
    ConditionReport rep{};
    const double qtol = tol / 10.0;

    // K0: unit mass.
    {
        const QuadResult r = moment(k, std::vector<int>(d, 0), qtol);
        rep.integral = r.value;
        rep.k0 = from_quad(r, std::abs(r.value - 1.0), tol);
    }

    // K1: invariance under coordinate sign flips and permutations, checked
    // pointwise on a deterministic sample.
    {
        const CounterRng rng(0x6b65726e31ull);
        double worst = 0.0;
        std::vector<std::size_t> perm(d);
        for (std::size_t pt = 0; pt < 32; ++pt) {
            Vec z(d);
            for (std::size_t i = 0; i < d; ++i)
                z[i] = 6.0 * rng.uniform(pt * d + i) - 3.0;
            const double base = profile_at(k, z);
            const double scale = std::abs(base) + profile_at(k, Vec(d, 0.0));
            for (std::size_t signs = 0; signs < (1u << d); ++signs) {
                for (std::size_t i = 0; i < d; ++i) perm[i] = i;
                do {
                    Vec t(d);
                    for (std::size_t i = 0; i < d; ++i)
                        t[i] = (signs & (1u << i)) ? -z[perm[i]] : z[perm[i]];
                    worst = std::max(worst, std::abs(profile_at(k, t) - base) / scale);
                } while (std::next_permutation(perm.begin(), perm.end()));
            }
        }
        rep.sign_perm_violation = worst;
        rep.k1 = worst <= 1e-12 ? CheckState::pass : CheckState::fail;
    }

    // K2: second-moment matrix equals the identity.
    {
        double dev = 0.0;
        bool ok = true;
        for (std::size_t i = 0; i < d && ok; ++i) {
            for (std::size_t j = i; j < d && ok; ++j) {
                std::vector<int> alpha(d, 0);
                alpha[i] += 1;
                alpha[j] += 1;
                const QuadResult r = moment(k, alpha, qtol);
                if (!r.converged) ok = false;
                dev = std::max(dev, std::abs(r.value - (i == j ? 1.0 : 0.0)));
            }
        }
        rep.covariance_deviation = dev;
        rep.k2 = !ok ? CheckState::undetermined
                     : (dev <= tol ? CheckState::pass : CheckState::fail);
    }

    // K3: fourth moments mu4 = 3 and (for d >= 2) mu22 = 1.
    {
        std::vector<int> a4(d, 0);
        a4[0] = 4;
        const QuadResult r4 = moment(k, a4, qtol);
        rep.mu4 = r4.value;
        bool ok = r4.converged;
        double dev = std::abs(r4.value - 3.0);
        if (d >= 2) {
            std::vector<int> a22(d, 0);
            a22[0] = 2;
            a22[1] = 2;
            const QuadResult r22 = moment(k, a22, qtol);
            rep.mu22 = r22.value;
            ok = ok && r22.converged;
            dev = std::max(dev, std::abs(r22.value - 1.0));
        } else {
            rep.mu22 = std::numeric_limits<double>::quiet_NaN();
        }
        rep.k3 = !ok ? CheckState::undetermined
                     : (dev <= tol ? CheckState::pass : CheckState::fail);
    }

    // K4: rotational symmetry, checked on deterministic points and rotations.
    {
        const CounterRng rng(0x6b65726e34ull);
        double worst = 0.0;
        for (std::size_t pt = 0; pt < 32; ++pt) {
            Vec z(d);
            for (std::size_t i = 0; i < d; ++i)
                z[i] = 6.0 * rng.uniform(pt * (d + 3) + i) - 3.0;
            const double base = profile_at(k, z);
            const double scale = std::abs(base) + profile_at(k, Vec(d, 0.0));
            Vec t = z;
            // compose a few Givens rotations with deterministic angles
            for (std::size_t g = 0; g + 1 < d + 1; ++g) {
                const std::size_t i = g % d, j = (g + 1) % d;
                if (i == j) continue;
                const double ang =
                    2.0 * std::numbers::pi * rng.uniform(1000 + pt * (d + 3) + g);
                const double c = std::cos(ang), s = std::sin(ang);
                const double ti = c * t[i] - s * t[j];
                const double tj = s * t[i] + c * t[j];
                t[i] = ti;
                t[j] = tj;
            }
            if (d == 1) t[0] = -t[0]; // the only rotation in 1-D
            worst = std::max(worst, std::abs(profile_at(k, t) - base) / scale);
        }
        rep.rotation_violation = worst;
        rep.k4 = worst <= 1e-10 ? CheckState::pass : CheckState::fail;
    }

    // K5: log-concavity with curvature bounded away from zero, verified by a
    // finite-difference Hessian of log K on a recorded compact grid.
    {
        rep.k5_grid_lo = -4.0;
        rep.k5_grid_hi = 4.0;
        rep.k5_grid_points = 9;
        rep.k5_bound = 1e-3;
        const double eps = 1e-4;
        double worst = -std::numeric_limits<double>::infinity();
        std::size_t evaluated = 0;

        auto log_k = [&](const Vec& z, bool& ok) {
            const double v = k.profile(squared_norm(z));
            if (!(v > 1e-300)) {
                ok = false;
                return 0.0;
            }
            return std::log(v);
        };

        const std::size_t npts = rep.k5_grid_points;
        std::vector<std::size_t> idx(d, 0);
        while (true) {
            Vec z(d);
            for (std::size_t i = 0; i < d; ++i)
                z[i] = rep.k5_grid_lo + (rep.k5_grid_hi - rep.k5_grid_lo) *
                                            static_cast<double>(idx[i]) /
                                            static_cast<double>(npts - 1);
            bool ok = true;
            Mat hess(d, d);
            const double f0 = log_k(z, ok);
            for (std::size_t i = 0; i < d && ok; ++i) {
                Vec zp = z, zm = z;
                zp[i] += eps;
                zm[i] -= eps;
                hess(i, i) = (log_k(zp, ok) - 2.0 * f0 + log_k(zm, ok)) / (eps * eps);
                for (std::size_t j = i + 1; j < d && ok; ++j) {
                    Vec zpp = z, zpm = z, zmp = z, zmm = z;
                    zpp[i] += eps; zpp[j] += eps;
                    zpm[i] += eps; zpm[j] -= eps;
                    zmp[i] -= eps; zmp[j] += eps;
                    zmm[i] -= eps; zmm[j] -= eps;
                    hess(i, j) = hess(j, i) =
                        (log_k(zpp, ok) - log_k(zpm, ok) - log_k(zmp, ok) + log_k(zmm, ok)) /
                        (4.0 * eps * eps);
                }
            }
            if (ok) {
                ++evaluated;
                worst = std::max(worst, spectral(hess).eigenvalues.front());
            }
            std::size_t carry = 0;
            while (carry < d && ++idx[carry] == npts) idx[carry++] = 0;
            if (carry == d) break;
        }
        rep.max_log_curvature = worst;
        rep.k5 = evaluated == 0 ? CheckState::undetermined
                                : (worst <= -rep.k5_bound ? CheckState::pass
                                                          : CheckState::fail);
    }

    return rep;
}

std::string to_string(CheckState s) {
    switch (s) {
        case CheckState::pass: return "pass";
        case CheckState::fail: return "fail";
        default: return "undetermined";
    }
}

} // namespace ridge
