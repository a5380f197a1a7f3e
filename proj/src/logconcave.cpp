#include "ridge/logconcave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "ridge/errors.hpp"
#include "ridge/normal.hpp"
#include "ridge/rng.hpp"

namespace ridge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Segment primitives.
//
// Everything the objective needs reduces to the scaled exponential moments
//   i_j(q) = integral_0^1 u^j exp(u q) du,   j = 0, 1, 2,
// whose closed forms ((e^q - 1)/q and friends) cancel catastrophically near
// q = 0, so a short power series takes over for |q| <= 1/2.

void iexp_moments(double q, double& i0, double& i1, double& i2)
{
    if (std::abs(q) <= 0.5) {
        // i_j = sum_k q^k / (k! (k + j + 1)); 22 terms reach 1e-18 at |q|=1/2.
        double term = 1.0; // q^k / k!
        i0 = i1 = i2 = 0.0;
        for (int k = 0; k < 22; ++k) {
            i0 += term / (k + 1);
            i1 += term / (k + 2);
            i2 += term / (k + 3);
            term *= q / (k + 1);
        }
        return;
    }
    const double eq = std::exp(q);
    i0 = (eq - 1.0) / q;
    i1 = (eq * (q - 1.0) + 1.0) / (q * q);
    i2 = (eq * (q * q - 2.0 * q + 2.0) - 2.0) / (q * q * q);
}

// J(a, b) = integral_0^1 exp((1-u) a + u b) du and its partials; the segment
// integral of exp(theta) over a unit-parameterized knot gap.
struct SegmentExp {
    double j, ja, jb, jaa, jab, jbb;
};

SegmentExp segment_exp(double a, double b)
{
    double i0, i1, i2;
    SegmentExp s;
    if (b <= a) {
        iexp_moments(b - a, i0, i1, i2);
        const double ea = std::exp(a);
        s.j = ea * i0;
        s.ja = ea * (i0 - i1);
        s.jb = ea * i1;
        s.jaa = ea * (i0 - 2.0 * i1 + i2);
        s.jab = ea * (i1 - i2);
        s.jbb = ea * i2;
    } else {
        // Same integral seen from b (substituting u -> 1-u), which keeps the
        // moment argument negative.  Factoring out exp of the smaller endpoint
        // would pair an underflowing exp with an overflowing moment (0 * inf)
        // once the segment spans more than ~700 log units, and the barrier
        // path of the constrained fit really does visit such segments.
        iexp_moments(a - b, i0, i1, i2);
        const double eb = std::exp(b);
        s.j = eb * i0;
        s.jb = eb * (i0 - i1);
        s.ja = eb * i1;
        s.jbb = eb * (i0 - 2.0 * i1 + i2);
        s.jab = eb * (i1 - i2);
        s.jaa = eb * i2;
    }
    return s;
}

// gap-free segment moments e^a i_j(b - a), j = 0..2, with the same
// overflow-safe endpoint choice as segment_exp.  These anchor u = 0 at a, so
// callers can build integrals of 1, u, u^2 against exp(theta) on the segment.
void segment_moments(double a, double b, double& e0, double& e1, double& e2)
{
    double i0, i1, i2;
    if (b <= a) {
        iexp_moments(b - a, i0, i1, i2);
        const double ea = std::exp(a);
        e0 = ea * i0;
        e1 = ea * i1;
        e2 = ea * i2;
    } else {
        iexp_moments(a - b, i0, i1, i2);
        const double eb = std::exp(b);
        e0 = eb * i0;
        e1 = eb * (i0 - i1);
        e2 = eb * (i0 - 2.0 * i1 + i2);
    }
}

// ---------------------------------------------------------------------------
// Piecewise-linear helpers on the full data grid.

double interp_at(const Vec& x, const Vec& y, double t)
{
    // x strictly increasing, t within [x.front(), x.back()].
    auto it = std::upper_bound(x.begin(), x.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - x.begin());
    if (hi == 0) return y.front();
    if (hi == x.size()) return y.back();
    std::size_t lo = hi - 1;
    double lam = (t - x[lo]) / (x[hi] - x[lo]);
    return (1.0 - lam) * y[lo] + lam * y[hi];
}

// L(phi) = sum_i w_i phi_i - sum_segments gap * J: the weighted log likelihood
// plus one minus the total mass (its Fenchel-style surrogate; stationary
// points integrate to one automatically).
double full_objective(const Vec& z, const Vec& w, const Vec& phi)
{
    double val = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) val += w[i] * phi[i];
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        double e0, e1, e2;
        segment_moments(phi[i], phi[i + 1], e0, e1, e2);
        val -= (z[i + 1] - z[i]) * e0;
    }
    return val;
}

void full_gradient(const Vec& z, const Vec& w, const Vec& phi, Vec& grad)
{
    const std::size_t m = z.size();
    grad.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) grad[i] = w[i];
    for (std::size_t i = 0; i + 1 < m; ++i) {
        SegmentExp s = segment_exp(phi[i], phi[i + 1]);
        const double gap = z[i + 1] - z[i];
        grad[i] -= gap * s.ja;
        grad[i + 1] -= gap * s.jb;
    }
}

// ---------------------------------------------------------------------------
// Symmetric positive definite tridiagonal solve (LDL^T, no pivoting).

void tridiag_solve(Vec diag, Vec off, Vec rhs, Vec& out)
{
    const std::size_t p = diag.size();
    for (std::size_t i = 1; i < p; ++i) {
        if (diag[i - 1] <= 0.0)
            throw error("log-concave fit: tridiagonal system lost definiteness");
        double l = off[i - 1] / diag[i - 1];
        diag[i] -= l * off[i - 1];
        rhs[i] -= l * rhs[i - 1];
        off[i - 1] = l;
    }
    if (diag[p - 1] <= 0.0)
        throw error("log-concave fit: tridiagonal system lost definiteness");
    out.assign(p, 0.0);
    out[p - 1] = rhs[p - 1] / diag[p - 1];
    for (std::size_t i = p - 1; i-- > 0;)
        out[i] = rhs[i] / diag[i] - off[i] * out[i + 1];
}

// ---------------------------------------------------------------------------
// Face problem: maximize L restricted to piecewise-linear functions with a
// fixed knot set.  Parameterizing by the knot values makes the Hessian
// tridiagonal, so each Newton step is linear time.

struct Face {
    std::vector<std::size_t> knots; // indices into z, ascending, ends included
    Vec kz;                         // z at the knots
    Vec kw;                         // hat-basis aggregated weights
};

Face make_face(const Vec& z, const Vec& w, const std::vector<std::size_t>& knots)
{
    Face f;
    f.knots = knots;
    f.kz.resize(knots.size());
    f.kw.assign(knots.size(), 0.0);
    for (std::size_t p = 0; p < knots.size(); ++p) f.kz[p] = z[knots[p]];
    std::size_t p = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        while (knots[p + 1] < i) ++p; // i always <= last knot
        if (i == knots[p]) {
            f.kw[p] += w[i];
        } else {
            double lam = (z[i] - f.kz[p]) / (f.kz[p + 1] - f.kz[p]);
            f.kw[p] += (1.0 - lam) * w[i];
            f.kw[p + 1] += lam * w[i];
        }
    }
    return f;
}

double face_objective(const Face& f, const Vec& psi)
{
    double val = 0.0;
    for (std::size_t p = 0; p < psi.size(); ++p) val += f.kw[p] * psi[p];
    for (std::size_t p = 0; p + 1 < psi.size(); ++p) {
        double e0, e1, e2;
        segment_moments(psi[p], psi[p + 1], e0, e1, e2);
        val -= (f.kz[p + 1] - f.kz[p]) * e0;
    }
    return val;
}

// Newton with backtracking from the (feasible) current values; returns the
// unconstrained face optimum.
Vec face_newton(const Face& f, Vec psi)
{
    const std::size_t p = psi.size();
    Vec grad(p), diag(p), off(p > 0 ? p - 1 : 0), step;
    double fval = face_objective(f, psi);
    for (int iter = 0; iter < 200; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(diag.begin(), diag.end(), 0.0);
        std::fill(off.begin(), off.end(), 0.0);
        for (std::size_t q = 0; q < p; ++q) grad[q] = f.kw[q];
        for (std::size_t q = 0; q + 1 < p; ++q) {
            SegmentExp s = segment_exp(psi[q], psi[q + 1]);
            const double gap = f.kz[q + 1] - f.kz[q];
            grad[q] -= gap * s.ja;
            grad[q + 1] -= gap * s.jb;
            diag[q] += gap * s.jaa;
            diag[q + 1] += gap * s.jbb;
            off[q] += gap * s.jab;
        }
        double gmax = 0.0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));
        if (gmax <= 1e-13) break;
        tridiag_solve(diag, off, grad, step);
        // Cap the raw step so exp() stays representable during the search.
        double smax = 0.0;
        for (double d : step) smax = std::max(smax, std::abs(d));
        double t = smax > 80.0 ? 80.0 / smax : 1.0;
        double descent = 0.0;
        for (std::size_t q = 0; q < p; ++q) descent += grad[q] * step[q];
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            Vec trial(p);
            for (std::size_t q = 0; q < p; ++q) trial[q] = psi[q] + t * step[q];
            double ftrial = face_objective(f, trial);
            if (ftrial >= fval + 1e-4 * t * descent) {
                psi.swap(trial);
                fval = ftrial;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }
    return psi;
}

// Expand knot values to the full grid by linear interpolation in z.
Vec expand(const Vec& z, const Face& f, const Vec& psi)
{
    Vec phi(z.size());
    std::size_t p = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        while (f.knots[p + 1] < i) ++p;
        if (i == f.knots[p]) {
            phi[i] = psi[p];
        } else {
            double lam = (z[i] - f.kz[p]) / (f.kz[p + 1] - f.kz[p]);
            phi[i] = (1.0 - lam) * psi[p] + lam * psi[p + 1];
        }
    }
    return phi;
}

double bend_at(const Vec& z, const Vec& phi, std::size_t j)
{
    double sl = (phi[j] - phi[j - 1]) / (z[j] - z[j - 1]);
    double sr = (phi[j + 1] - phi[j]) / (z[j + 1] - z[j]);
    return sr - sl; // concavity wants <= 0
}

// Subtract log integral exp(phi) so the density integrates to one.
void normalize_logdensity(const Vec& z, Vec& phi)
{
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        double e0, e1, e2;
        segment_moments(phi[i], phi[i + 1], e0, e1, e2);
        mass += (z[i + 1] - z[i]) * e0;
    }
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw error("log-concave fit: normalization mass is not positive");
    const double shift = std::log(mass);
    for (double& v : phi) v -= shift;
}

LogConcaveFit assemble_fit(const Vec& z, const Vec& w, const Vec& phi,
                           const std::vector<std::size_t>& knot_idx)
{
    LogConcaveFit fit;
    fit.knots.reserve(knot_idx.size());
    fit.phi.reserve(knot_idx.size());
    for (std::size_t k : knot_idx) {
        fit.knots.push_back(z[k]);
        fit.phi.push_back(phi[k]);
    }
    fit.slopes.resize(fit.knots.size() - 1);
    for (std::size_t p = 0; p + 1 < fit.knots.size(); ++p)
        fit.slopes[p] = (fit.phi[p + 1] - fit.phi[p]) / (fit.knots[p + 1] - fit.knots[p]);
    fit.loglik = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) fit.loglik += w[i] * phi[i];
    return fit;
}

} // namespace

// ---------------------------------------------------------------------------
// Sample construction.

WeightedSample make_weighted_sample(Vec z, Vec w)
{
    if (z.size() != w.size())
        throw input_error("weighted sample: point and weight counts differ");
    std::vector<std::size_t> order(z.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });
    WeightedSample s;
    double total = 0.0;
    for (std::size_t r : order) {
        if (!std::isfinite(z[r]) || !std::isfinite(w[r]))
            throw input_error("weighted sample: non-finite entry");
        if (w[r] <= 0.0) continue;
        if (!s.z.empty() && z[r] == s.z.back()) {
            s.w.back() += w[r];
        } else {
            s.z.push_back(z[r]);
            s.w.push_back(w[r]);
        }
        total += w[r];
    }
    if (s.z.empty())
        throw degenerate_sample_error("weighted sample: no positive-weight points");
    for (double& v : s.w) v /= total;
    return s;
}

double sample_mean(const WeightedSample& s)
{
    double m = 0.0;
    for (std::size_t i = 0; i < s.z.size(); ++i) m += s.w[i] * s.z[i];
    return m;
}

double sample_variance(const WeightedSample& s)
{
    const double m = sample_mean(s);
    double v = 0.0;
    for (std::size_t i = 0; i < s.z.size(); ++i)
        v += s.w[i] * (s.z[i] - m) * (s.z[i] - m);
    return v;
}

// ---------------------------------------------------------------------------
// Active-set fit.

LogConcaveFit logconcave_fit(const WeightedSample& s)
{
    const Vec& z = s.z;
    const Vec& w = s.w;
    const std::size_t m = z.size();
    if (m < 2)
        throw degenerate_sample_error("log-concave fit needs two distinct points");

    std::vector<char> is_knot(m, 0);
    is_knot[0] = is_knot[m - 1] = 1;
    auto knot_list = [&]() {
        std::vector<std::size_t> k;
        for (std::size_t i = 0; i < m; ++i)
            if (is_knot[i]) k.push_back(i);
        return k;
    };

    // Flat start: feasible for every knot set.
    Vec phi(m, -std::log(z.back() - z.front()));

    const std::size_t max_outer = 10 * m + 100;
    bool optimal = false;
    double best_L = -kInf;
    int stalls = 0;
    for (std::size_t outer = 0; outer < max_outer; ++outer) {
        // Solve the current face to optimality, dropping knots whose
        // concavity constraint blocks the way.
        for (std::size_t inner = 0; inner < m + 2; ++inner) {
            Face f = make_face(z, w, knot_list());
            Vec psi(f.knots.size());
            for (std::size_t p = 0; p < f.knots.size(); ++p) psi[p] = phi[f.knots[p]];
            Vec psi_star = face_newton(f, psi);
            Vec phi_star = expand(z, f, psi_star);

            // Largest step toward phi_star keeping every interior knot bend
            // non-positive (bends are linear in phi).
            double tmax = 1.0;
            std::size_t blocker = m;
            for (std::size_t p = 1; p + 1 < f.knots.size(); ++p) {
                std::size_t j = f.knots[p];
                double b_new = bend_at(z, phi_star, j);
                if (b_new <= 0.0) continue;
                double b_old = bend_at(z, phi, j);
                double t = b_old < 0.0 ? b_old / (b_old - b_new) : 0.0;
                if (t < tmax) {
                    tmax = t;
                    blocker = j;
                }
            }
            if (blocker == m) {
                phi.swap(phi_star);
                break; // face optimum is feasible
            }
            for (std::size_t i = 0; i < m; ++i)
                phi[i] += tmax * (phi_star[i] - phi[i]);
            is_knot[blocker] = 0;
            // Sweep up anything else the step flattened.
            for (std::size_t p = 1; p + 1 < f.knots.size(); ++p) {
                std::size_t j = f.knots[p];
                if (is_knot[j] && bend_at(z, phi, j) > -1e-14)
                    if (bend_at(z, phi_star, j) > 0.0) is_knot[j] = 0;
            }
        }

        // A knot whose multiplier is barely negative promises an improvement
        // of order beta^2, which can sit below the resolution of the
        // objective; inserting it then just bounces (the face solve drops it
        // again with nothing gained).  Count no-progress rounds so such
        // insert/drop cycles terminate as converged.
        const double L_now = full_objective(z, w, phi);
        if (L_now <= best_L + 1e-13 * (1.0 + std::abs(L_now)))
            ++stalls;
        else
            stalls = 0;
        best_L = std::max(best_L, L_now);

        // KKT multipliers of the inactive concavity constraints via the
        // cumulative-gradient recursion; insert the most violating index.
        Vec grad;
        full_gradient(z, w, phi, grad);
        double cum = 0.0, beta = 0.0;
        double worst = -1e-10; // spec'd multiplier tolerance
        std::size_t insert_at = m;
        for (std::size_t r = 0; r + 1 < m; ++r) {
            cum += grad[r];
            beta += (z[r + 1] - z[r]) * cum;
            std::size_t j = r + 1;
            if (j + 1 < m && !is_knot[j] && beta < worst) {
                worst = beta;
                insert_at = j;
            }
        }
        if (insert_at == m || (stalls >= 3 && worst > -1e-6)) {
            optimal = true;
            break;
        }
        is_knot[insert_at] = 1;
    }
    if (!optimal)
        throw error("log-concave fit did not converge");

    normalize_logdensity(z, phi);
    return assemble_fit(z, w, phi, knot_list());
}

// ---------------------------------------------------------------------------
// Fit evaluation and moments.

double LogConcaveFit::log_density(double x) const
{
    if (x < knots.front() || x > knots.back()) return -kInf;
    return interp_at(knots, phi, x);
}

double LogConcaveFit::density_mean() const
{
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
        double e0, e1, e2;
        segment_moments(phi[p], phi[p + 1], e0, e1, e2);
        const double gap = knots[p + 1] - knots[p];
        m0 += gap * e0;
        m1 += gap * (knots[p] * e0 + gap * e1);
    }
    return m1 / m0;
}

double LogConcaveFit::density_variance() const
{
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
        double e0, e1, e2;
        segment_moments(phi[p], phi[p + 1], e0, e1, e2);
        const double gap = knots[p + 1] - knots[p];
        const double u = knots[p];
        m0 += gap * e0;
        m1 += gap * (u * e0 + gap * e1);
        m2 += gap * (u * u * e0 + 2.0 * u * gap * e1 + gap * gap * e2);
    }
    const double mean = m1 / m0;
    return m2 / m0 - mean * mean;
}

ModeInfo mode(const LogConcaveFit& fit)
{
    const Vec& k = fit.knots;
    const Vec& phi = fit.phi;
    double top = *std::max_element(phi.begin(), phi.end());

    // Superlevel interval a hair below the max; a genuinely flat top keeps
    // macroscopic width there, a strict peak collapses to a point.
    const double level = top - 1e-8 * (1.0 + std::abs(top));
    double lo = k.back(), hi = k.front();
    for (std::size_t p = 0; p < k.size(); ++p) {
        if (phi[p] >= level) {
            lo = std::min(lo, k[p]);
            hi = std::max(hi, k[p]);
        }
        if (p + 1 < k.size() &&
            ((phi[p] < level) != (phi[p + 1] < level))) {
            double x = k[p] + (level - phi[p]) * (k[p + 1] - k[p]) / (phi[p + 1] - phi[p]);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    ModeInfo info;
    info.flat_lo = lo;
    info.flat_hi = hi;
    info.flat_top = (hi - lo) > 1e-6 * (k.back() - k.front());
    if (info.flat_top) {
        info.location = 0.5 * (lo + hi);
    } else {
        std::size_t arg = 0;
        for (std::size_t p = 1; p < phi.size(); ++p)
            if (phi[p] > phi[arg]) arg = p;
        info.location = k[arg];
    }
    return info;
}

Interval threshold_interval(const LogConcaveFit& fit, double tau)
{
    if (!(tau > 0.0) || tau > 1.0)
        throw input_error("threshold interval: tau must lie in (0, 1]");
    ModeInfo mi = mode(fit);
    if (tau == 1.0) {
        if (mi.flat_top) return {mi.flat_lo, mi.flat_hi};
        return {mi.location, mi.location};
    }

    const Vec& k = fit.knots;
    const Vec& phi = fit.phi;
    const double top = *std::max_element(phi.begin(), phi.end());
    const double level = top + std::log(tau);

    Interval iv{k.front(), k.back()};
    if (phi.front() < level) {
        for (std::size_t p = 0; p + 1 < k.size(); ++p) {
            if (phi[p] < level && phi[p + 1] >= level) {
                iv.lo = k[p] + (level - phi[p]) * (k[p + 1] - k[p]) / (phi[p + 1] - phi[p]);
                break;
            }
        }
    }
    if (phi.back() < level) {
        for (std::size_t p = k.size() - 1; p-- > 0;) {
            if (phi[p] >= level && phi[p + 1] < level) {
                iv.hi = k[p] + (level - phi[p]) * (k[p + 1] - k[p]) / (phi[p + 1] - phi[p]);
                break;
            }
        }
    }
    return iv;
}

// ---------------------------------------------------------------------------
// Gaussian smoothing.  Per segment [u, v] with slope a and offset phi(u):
//   contribution(y) = exp(phi_u + a (y - u) + a^2 g^2 / 2)
//                     * (Phi((v - y - a g^2)/g) - Phi((u - y - a g^2)/g)),
// assembled from log magnitudes so huge slopes stay finite.

namespace {

struct SegTerms {
    double q;   // segment contribution to the smoothed pdf
    double qp;  // its derivative
    double qpp; // its second derivative
};

SegTerms segment_smooth(double u, double v, double phi_u, double a, double g, double y)
{
    const double c = y + a * g * g;
    const double l = (u - c) / g;
    const double r = (v - c) / g;
    const double logcoef = phi_u + a * (y - u) + 0.5 * a * a * g * g;

    SegTerms t{0.0, 0.0, 0.0};
    const double logdiff = log_normal_cdf_diff(l, r);
    if (logdiff > -kInf) t.q = std::exp(logcoef + logdiff);

    // phi_n(l) - phi_n(r) with phi_n the standard normal pdf.
    const double e_l = -0.5 * l * l, e_r = -0.5 * r * r;
    double diff_pdf = 0.0; // signed, as exp(logcoef + log|.|)
    if (e_l != e_r) {
        double mag = (e_l > e_r) ? log_sub_exp(e_l, e_r) : log_sub_exp(e_r, e_l);
        double val = std::exp(logcoef + mag - 0.5 * log_2pi);
        diff_pdf = (e_l > e_r) ? val : -val;
    }
    t.qp = a * t.q + diff_pdf / g;

    // l phi_n(l) - r phi_n(r), same signed log-space assembly.
    double term_l = 0.0, term_r = 0.0;
    if (l != 0.0)
        term_l = (l > 0 ? 1.0 : -1.0) *
                 std::exp(logcoef + std::log(std::abs(l)) + e_l - 0.5 * log_2pi);
    if (r != 0.0)
        term_r = (r > 0 ? 1.0 : -1.0) *
                 std::exp(logcoef + std::log(std::abs(r)) + e_r - 0.5 * log_2pi);
    t.qpp = 2.0 * a * t.qp - a * a * t.q + (term_l - term_r) / (g * g);
    return t;
}

} // namespace

double SmoothedFit::pdf(double y) const
{
    double acc = 0.0;
    for (std::size_t p = 0; p + 1 < base.knots.size(); ++p)
        acc += segment_smooth(base.knots[p], base.knots[p + 1], base.phi[p],
                              base.slopes[p], gamma, y)
                   .q;
    return acc;
}

double SmoothedFit::dpdf(double y) const
{
    double acc = 0.0;
    for (std::size_t p = 0; p + 1 < base.knots.size(); ++p)
        acc += segment_smooth(base.knots[p], base.knots[p + 1], base.phi[p],
                              base.slopes[p], gamma, y)
                   .qp;
    return acc;
}

double SmoothedFit::d2pdf(double y) const
{
    double acc = 0.0;
    for (std::size_t p = 0; p + 1 < base.knots.size(); ++p)
        acc += segment_smooth(base.knots[p], base.knots[p + 1], base.phi[p],
                              base.slopes[p], gamma, y)
                   .qpp;
    return acc;
}

SmoothedFit smooth(const LogConcaveFit& fit, double empirical_variance)
{
    SmoothedFit sf;
    sf.base = fit;
    const double target = empirical_variance;
    const double deficit = target - fit.density_variance();
    if (deficit < 1e-12) {
        sf.gamma = 1e-6 * std::sqrt(std::max(target, 0.0));
        if (sf.gamma <= 0.0) sf.gamma = 1e-12;
        sf.gamma_clamped = true;
    } else {
        sf.gamma = std::sqrt(deficit);
    }
    return sf;
}

double smoothed_mode(const SmoothedFit& sf)
{
    const double g = sf.gamma;
    double lo = sf.base.knots.front() - 4.0 * g;
    double hi = sf.base.knots.back() + 4.0 * g;
    // Steep boundary slopes can push the smoothed mode past the support by
    // O(slope * gamma^2); widen until the derivative brackets a root.
    for (int i = 0; i < 200 && sf.dpdf(lo) <= 0.0; ++i) lo -= 4.0 * g;
    for (int i = 0; i < 200 && sf.dpdf(hi) >= 0.0; ++i) hi += 4.0 * g;

    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 300; ++iter) {
        const double d1 = sf.dpdf(x);
        if (std::abs(d1) <= 1e-10) return x;
        if (d1 > 0.0)
            lo = x;
        else
            hi = x;
        const double d2 = sf.d2pdf(x);
        double next = (d2 < 0.0) ? x - d1 / d2 : x;
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 1e-15 * (std::abs(lo) + std::abs(hi) + 1.0)) return next;
        x = next;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Mode-constrained fit: log-barrier interior point over the full grid with m
// inserted as a knot.  Constraints: interior bends <= 0 (except at m, where
// the slope-sign pair implies it) and slopes >= 0 left of m, <= 0 right.

namespace {

struct BarrierConstraint {
    // slack(phi) = c0 + sum coef_k phi_{idx_k}; strictly positive inside.
    std::size_t idx[3];
    double coef[3];
    int nnz;
};

// Cholesky on a symmetric band matrix, bandwidth 2; band[k][i] = A(i, i+k).
// Returns false on breakdown instead of factoring garbage.
bool banded_cholesky(std::vector<Vec>& band, std::size_t n)
{
    const std::size_t bw = 2;
    for (std::size_t i = 0; i < n; ++i) {
        double d = band[0][i];
        for (std::size_t j = (i > bw ? i - bw : 0); j < i; ++j) {
            const double lij = band[i - j][j];
            d -= lij * lij;
        }
        if (!(d > 0.0)) return false;
        d = std::sqrt(d);
        band[0][i] = d;
        for (std::size_t k = 1; k <= bw && i + k < n; ++k) {
            double v = band[k][i];
            for (std::size_t j = (i + k > bw ? i + k - bw : 0); j < i; ++j)
                v -= band[i + k - j][j] * band[i - j][j];
            band[k][i] = v / d;
        }
    }
    return true;
}

// Solve A x = rhs for banded SPD A.  Sample order statistics produce gaps
// spanning many orders of magnitude, so the system is Jacobi-equilibrated
// first and the factorization retried with growing diagonal shifts; the
// slightly inexact Newton direction that a shift produces is harmless under
// the caller's line search.
void banded_solve(const std::vector<Vec>& band_in, Vec& rhs)
{
    const std::size_t n = rhs.size();
    const std::size_t bw = 2;
    Vec scale(n);
    for (std::size_t i = 0; i < n; ++i)
        scale[i] = 1.0 / std::sqrt(std::max(band_in[0][i], 1e-300));

    std::vector<Vec> band;
    for (double shift : {0.0, 1e-14, 1e-10, 1e-6, 1e-2}) {
        band = band_in;
        for (std::size_t k = 0; k <= bw; ++k)
            for (std::size_t i = 0; i + k < n; ++i) band[k][i] *= scale[i] * scale[i + k];
        for (std::size_t i = 0; i < n; ++i) band[0][i] += shift;
        if (banded_cholesky(band, n)) {
            // (S A S) y = S b, x = S y with S = diag(scale)
            for (std::size_t i = 0; i < n; ++i) rhs[i] *= scale[i];
            // forward then back substitution
            for (std::size_t i = 0; i < n; ++i) {
                double v = rhs[i];
                for (std::size_t k = 1; k <= bw && k <= i; ++k)
                    v -= band[k][i - k] * rhs[i - k];
                rhs[i] = v / band[0][i];
            }
            for (std::size_t i = n; i-- > 0;) {
                double v = rhs[i];
                for (std::size_t k = 1; k <= bw && i + k < n; ++k)
                    v -= band[k][i] * rhs[i + k];
                rhs[i] = v / band[0][i];
            }
            for (std::size_t i = 0; i < n; ++i) rhs[i] *= scale[i];
            return;
        }
    }
    throw error("constrained fit: banded factorization failed");
}

} // namespace

LogConcaveFit constrained_fit(const WeightedSample& s, double m)
{
    if (s.z.empty() || m < s.z.front() || m > s.z.back())
        throw input_error("constrained fit: mode constraint outside the sample range");
    // Build the augmented grid with m as a knot.
    Vec y = s.z, w = s.w;
    const double span = s.z.back() - s.z.front();
    std::size_t im;
    {
        auto it = std::lower_bound(y.begin(), y.end(), m);
        im = static_cast<std::size_t>(it - y.begin());
        bool matches = (im < y.size() && std::abs(y[im] - m) <= 1e-12 * std::max(1.0, span));
        if (!matches && im > 0 && std::abs(y[im - 1] - m) <= 1e-12 * std::max(1.0, span)) {
            --im;
            matches = true;
        }
        if (!matches) {
            y.insert(y.begin() + static_cast<std::ptrdiff_t>(im), m);
            w.insert(w.begin() + static_cast<std::ptrdiff_t>(im), 0.0);
        }
    }
    const std::size_t M = y.size();
    if (M < 2)
        throw degenerate_sample_error("constrained fit needs two distinct points");

    std::vector<BarrierConstraint> cons;
    auto gap = [&](std::size_t i) { return y[i + 1] - y[i]; };
    for (std::size_t j = 1; j + 1 < M; ++j) {
        if (j == im) continue; // implied by the slope-sign pair
        BarrierConstraint c;
        c.nnz = 3;
        c.idx[0] = j - 1;
        c.idx[1] = j;
        c.idx[2] = j + 1;
        // slack = -bend_j = slope_left - slope_right >= 0
        c.coef[0] = -1.0 / gap(j - 1);
        c.coef[1] = 1.0 / gap(j - 1) + 1.0 / gap(j);
        c.coef[2] = -1.0 / gap(j);
        cons.push_back(c);
    }
    if (im > 0) {
        BarrierConstraint c; // slope into m from the left >= 0
        c.nnz = 2;
        c.idx[0] = im - 1;
        c.idx[1] = im;
        c.coef[0] = -1.0 / gap(im - 1);
        c.coef[1] = 1.0 / gap(im - 1);
        cons.push_back(c);
    }
    if (im + 1 < M) {
        BarrierConstraint c; // slope out of m to the right <= 0
        c.nnz = 2;
        c.idx[0] = im;
        c.idx[1] = im + 1;
        c.coef[0] = 1.0 / gap(im);
        c.coef[1] = -1.0 / gap(im);
        cons.push_back(c);
    }

    auto slack = [&](const BarrierConstraint& c, const Vec& phi) {
        double v = 0.0;
        for (int k = 0; k < c.nnz; ++k) v += c.coef[k] * phi[c.idx[k]];
        return v;
    };

    // Strictly feasible start: concave quadratic peaked at m.
    const double scale = std::max(span, 1e-12);
    Vec phi(M);
    for (std::size_t i = 0; i < M; ++i) {
        double t = (y[i] - m) / scale;
        phi[i] = -t * t - std::log(scale);
    }

    Vec grad(M), step(M);
    std::vector<Vec> band(3, Vec(M, 0.0));
    double mu = 1.0;
    while (mu >= 1e-13) {
        for (int iter = 0; iter < 120; ++iter) {
            // Gradient and banded Hessian of L + mu * sum log slack.
            full_gradient(y, w, phi, grad);
            for (auto& row : band) std::fill(row.begin(), row.end(), 0.0);
            for (std::size_t i = 0; i + 1 < M; ++i) {
                SegmentExp se = segment_exp(phi[i], phi[i + 1]);
                const double g = gap(i);
                band[0][i] += g * se.jaa;
                band[0][i + 1] += g * se.jbb;
                band[1][i] += g * se.jab;
            }
            for (const auto& c : cons) {
                const double sv = slack(c, phi);
                if (!(sv > 0.0)) throw error("constrained fit: iterate left the interior");
                for (int a = 0; a < c.nnz; ++a) {
                    grad[c.idx[a]] += mu * c.coef[a] / sv;
                    for (int b = a; b < c.nnz; ++b) {
                        double h = mu * c.coef[a] * c.coef[b] / (sv * sv);
                        std::size_t ia = c.idx[a], ib = c.idx[b];
                        band[ib - ia][ia] += h; // -(Hessian) accumulates positive
                    }
                }
            }
            double gmax = 0.0;
            for (double gv : grad) gmax = std::max(gmax, std::abs(gv));
            if (gmax <= std::max(1e-12, 1e-3 * mu)) break;

            step = grad;
            banded_solve(band, step);

            auto barrier_value = [&](const Vec& p) {
                double val = full_objective(y, w, p);
                for (const auto& c : cons) {
                    double sv = slack(c, p);
                    if (!(sv > 0.0)) return -kInf;
                    val += mu * std::log(sv);
                }
                return val;
            };
            const double f0 = barrier_value(phi);

            // Newton decrement: the improvement a full step could deliver.
            // Near-active constraints make the Hessian so stiff that the
            // gradient alone never looks converged, while the objective
            // already is; bail out once the achievable gain is in the noise.
            double descent = 0.0;
            for (std::size_t i = 0; i < M; ++i) descent += grad[i] * step[i];
            if (descent <= 1e-14 * (1.0 + std::abs(f0))) break;

            // Fraction-to-boundary, then backtracking on the barrier value.
            double tmax = 1.0;
            for (const auto& c : cons) {
                double dv = 0.0;
                for (int k = 0; k < c.nnz; ++k) dv += c.coef[k] * step[c.idx[k]];
                if (dv < 0.0) tmax = std::min(tmax, -0.995 * slack(c, phi) / dv);
            }
            double t = std::min(1.0, tmax);
            for (int ls = 0; ls < 60; ++ls) {
                Vec trial(M);
                for (std::size_t i = 0; i < M; ++i) trial[i] = phi[i] + t * step[i];
                const double ft = barrier_value(trial);
                if (ft >= f0 + 1e-4 * t * descent) {
                    phi.swap(trial);
                    break;
                }
                t *= 0.5;
                if (ls == 59) t = 0.0;
            }
            if (t == 0.0) break;
        }
        mu *= 0.2;
    }

    normalize_logdensity(y, phi);
    std::vector<std::size_t> all(M);
    std::iota(all.begin(), all.end(), 0);
    return assemble_fit(y, w, phi, all);
}

// ---------------------------------------------------------------------------
// Likelihood-ratio machinery.

double lrt_statistic(const WeightedSample& s, const LogConcaveFit& fit, double m)
{
    const LogConcaveFit con = constrained_fit(s, m);
    const double n = static_cast<double>(s.z.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < s.z.size(); ++i)
        acc += s.w[i] * (fit.log_density(s.z[i]) - con.log_density(s.z[i]));
    return 2.0 * n * acc;
}

LrtInterval lr_confidence_interval(const WeightedSample& s, double alpha,
                                   double critical_value)
{
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw input_error("confidence interval: alpha must lie in (0, 1)");
    if (!(critical_value >= 0.0))
        throw input_error("confidence interval: critical value must be non-negative");
    const double c_alpha = critical_value;
    const LogConcaveFit fit = logconcave_fit(s);
    const double mx = mode(fit).location;
    const double lo_end = s.z.front(), hi_end = s.z.back();

    auto stat = [&](double m) { return lrt_statistic(s, fit, m); };

    LrtInterval out;
    // Monotonicity audit on a 50-point grid: the statistic should fall toward
    // the mode on each side.
    {
        const int G = 50;
        Vec gm(G), gs(G);
        for (int k = 0; k < G; ++k) {
            gm[k] = lo_end + (hi_end - lo_end) * k / (G - 1);
            gs[k] = stat(gm[k]);
        }
        out.monotone = true;
        for (int k = 0; k + 1 < G; ++k) {
            double slackv = 1e-6 * (1.0 + std::abs(gs[k]) + std::abs(gs[k + 1]));
            if (gm[k + 1] <= mx && gs[k + 1] > gs[k] + slackv) out.monotone = false;
            if (gm[k] >= mx && gs[k + 1] < gs[k] - slackv) out.monotone = false;
        }
    }

    const double width_tol = 1e-8 * std::max(hi_end - lo_end, 1e-12);
    // Left endpoint.
    if (stat(lo_end) <= c_alpha) {
        out.lo = lo_end;
    } else {
        double a = lo_end, b = mx;
        while (b - a > width_tol) {
            double mid = 0.5 * (a + b);
            (stat(mid) <= c_alpha ? b : a) = mid;
        }
        out.lo = 0.5 * (a + b);
    }
    // Right endpoint.
    if (stat(hi_end) <= c_alpha) {
        out.hi = hi_end;
    } else {
        double a = mx, b = hi_end;
        while (b - a > width_tol) {
            double mid = 0.5 * (a + b);
            (stat(mid) <= c_alpha ? a : b) = mid;
        }
        out.hi = 0.5 * (a + b);
    }
    return out;
}

double calibrate_critical_value(double alpha, std::size_t n, std::size_t reps,
                                std::uint64_t seed)
{
    if (!(alpha > 0.0) || alpha > 1.0)
        throw input_error("calibration: alpha must lie in (0, 1]");
    if (n < 2 || reps < 1)
        throw input_error("calibration: need n >= 2 and reps >= 1");

    Vec stats(reps, 0.0);
    CounterRng root(seed);
    bool failed = false;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t rep = 0; rep < static_cast<std::ptrdiff_t>(reps); ++rep) {
        try {
            CounterRng rng = root.substream(static_cast<std::uint64_t>(rep));
            Vec z(n), w(n, 1.0);
            for (std::size_t i = 0; i < n; ++i) z[i] = rng.normal(i);
            WeightedSample samp = make_weighted_sample(std::move(z), std::move(w));
            LogConcaveFit fit = logconcave_fit(samp);
            stats[static_cast<std::size_t>(rep)] = lrt_statistic(samp, fit, 0.0);
        } catch (const std::exception&) {
#pragma omp critical
            failed = true;
        }
    }
    if (failed)
        throw error("calibration: a replicate fit failed");
    std::sort(stats.begin(), stats.end());
    double kfrac = std::ceil((1.0 - alpha) * static_cast<double>(reps));
    if (kfrac < 1.0) return 0.0; // 0-quantile of a nonnegative statistic
    std::size_t k = static_cast<std::size_t>(
        std::min(kfrac, static_cast<double>(reps)));
    return stats[k - 1];
}

} // namespace ridge
