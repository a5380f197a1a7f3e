#include "ridge/ridge_search.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "ridge/errors.hpp"
#include "ridge/local_moments.hpp"
#include "ridge/logconcave.hpp"
#include "ridge/symmetric_eigen.hpp"

namespace ridge {

namespace {

struct ResolvedConfig {
    double h, tol, tau, min_n_eff;
    std::size_t max_iter;
    std::size_t s;
    bool record_trace;
};

ResolvedConfig resolve(const SearchConfig& cfg, std::size_t d)
{
    if (!(cfg.h > 0.0)) throw input_error("search: bandwidth must be positive");
    if (cfg.max_iter == 0) throw input_error("search: max_iter must be positive");
    if (!(cfg.tau > 0.0) || cfg.tau > 1.0)
        throw input_error("search: tau must lie in (0, 1]");
    ResolvedConfig r;
    r.h = cfg.h;
    r.tol = cfg.tol > 0.0 ? cfg.tol : 1e-4 * cfg.h;
    r.tau = cfg.tau;
    r.max_iter = cfg.max_iter;
    r.min_n_eff = cfg.min_n_eff;
    r.record_trace = cfg.record_trace;
    int s = cfg.ridge_dim >= 0 ? cfg.ridge_dim : static_cast<int>(d) - 1;
    if (s < 0 || s > static_cast<int>(d))
        throw input_error("search: ridge dimension out of range");
    r.s = static_cast<std::size_t>(s);
    return r;
}

void check_start(const PointCloud& data, const Vec& start)
{
    if (start.size() != data.d)
        throw input_error("search: start dimension does not match the data");
    for (double v : start)
        if (!std::isfinite(v)) throw input_error("search: non-finite start");
}

#ifndef NDEBUG
double kde_value(const PointCloud& data, const Vec& x, double h, const Kernel& k)
{
    return local_moments(data, x, h, k).s0;
}
#endif

// Gaussian KDE value, gradient, and Hessian of the log-density in one sweep.
struct LogDensityDerivatives {
    double f;
    Vec grad;  // D log f
    Mat hess;  // D^2 log f
};

LogDensityDerivatives log_density_derivatives(const PointCloud& data, const Vec& x, double h)
{
    const std::size_t d = data.d;
    const double c = std::pow(2.0 * M_PI, -0.5 * static_cast<double>(d));
    const double hd = std::pow(h, -static_cast<double>(d));
    const double inv_h2 = 1.0 / (h * h);

    double f = 0.0;
    Vec gf(d, 0.0);
    Mat hf(d, d);
    Vec diff(d);
    for (std::size_t i = 0; i < data.n; ++i) {
        const double* p = data.point(i);
        double q = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            diff[k] = p[k] - x[k];
            q += diff[k] * diff[k];
        }
        const double w = hd * c * std::exp(-0.5 * q * inv_h2) / static_cast<double>(data.n);
        f += w;
        for (std::size_t k = 0; k < d; ++k) gf[k] += w * diff[k] * inv_h2;
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t s = 0; s < d; ++s)
                hf(r, s) += w * (diff[r] * diff[s] * inv_h2 * inv_h2 -
                                 (r == s ? inv_h2 : 0.0));
    }
    if (f <= 1e-300)
        throw empty_neighborhood_error(
            "subspace-constrained mean shift: every kernel weight underflowed");

    LogDensityDerivatives out;
    out.f = f;
    out.grad = gf;
    for (double& v : out.grad) v /= f;
    out.hess = Mat(d, d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t s = 0; s < d; ++s)
            out.hess(r, s) = hf(r, s) / f - out.grad[r] * out.grad[s];
    return out;
}

// Direction, weights, and projected fit for one LCRS/sLCRS iteration.
struct ProjectedFit {
    Vec v;
    WeightedSample sample;
    LogConcaveFit fit;
};

ProjectedFit projected_fit(const PointCloud& data, const Vec& x, const ResolvedConfig& rc,
                           const Kernel& kernel, const Vec& v_prev)
{
    LocalMoments lm = local_moments(data, x, rc.h, kernel);
    if (lm.n_eff < rc.min_n_eff)
        throw degenerate_sample_error(
            "ridge search: effective neighborhood too small to trust a direction");
    ConditionalCovariance cc = conditional_covariance(lm, data, x, rc.h);
    SpectralDecomposition dec = spectral(cc.sigma);

    ProjectedFit pf;
    // Smallest-eigenvalue direction, kept continuous across iterations.
    pf.v.assign(data.d, 0.0);
    for (std::size_t k = 0; k < data.d; ++k) pf.v[k] = dec.vectors(k, data.d - 1);
    bool have_prev = false;
    for (double c : v_prev)
        if (c != 0.0) have_prev = true;
    if (have_prev) {
        if (dot(pf.v, v_prev) < 0.0)
            for (double& c : pf.v) c = -c;
    } else {
        for (double c : pf.v) {
            if (c == 0.0) continue;
            if (c < 0.0)
                for (double& u : pf.v) u = -u;
            break;
        }
    }

    double wmax = 0.0;
    for (double w : lm.weights) wmax = std::max(wmax, w);
    Vec z, w;
    z.reserve(data.n);
    w.reserve(data.n);
    for (std::size_t i = 0; i < data.n; ++i) {
        if (lm.weights[i] < 1e-12 * wmax) continue;
        const double* p = data.point(i);
        double proj = 0.0;
        for (std::size_t k = 0; k < data.d; ++k) proj += pf.v[k] * (p[k] - x[k]);
        z.push_back(proj);
        w.push_back(lm.weights[i]);
    }
    pf.sample = make_weighted_sample(std::move(z), std::move(w));
    if (pf.sample.z.size() < 2)
        throw degenerate_sample_error(
            "ridge search: projected sample collapsed to fewer than two points");
    pf.fit = logconcave_fit(pf.sample);
    return pf;
}

RidgeResult lcrs_like(const PointCloud& data, const Vec& start, const SearchConfig& cfg,
                      bool smoothed)
{
    check_start(data, start);
    ResolvedConfig rc = resolve(cfg, data.d);
    if (rc.s != data.d - 1)
        throw input_error("ridge search: only codimension-one ridges are supported");
    const Kernel kernel = gaussian_kernel(data.d);

    RidgeResult res;
    res.start = start;
    res.point = start;
    if (rc.record_trace) res.trace.push_back(start);

    Vec x = start, v_prev(data.d, 0.0);
    try {
        for (std::size_t it = 1; it <= rc.max_iter; ++it) {
            ProjectedFit pf = projected_fit(data, x, rc, kernel, v_prev);
            v_prev = pf.v;
            double m;
            if (smoothed) {
                m = smoothed_mode(smooth(pf.fit, sample_variance(pf.sample)));
            } else {
                m = mode(pf.fit).location;
            }
            axpy(m, pf.v, x);
            res.iterations = it;
            if (rc.record_trace) res.trace.push_back(x);
            if (std::abs(m) <= rc.tol) {
                res.converged = true;
                break;
            }
        }
        res.point = x;
        if (!smoothed) {
            // Threshold interval of the fit at the final point, mapped along
            // the final direction.
            ProjectedFit pf = projected_fit(data, x, rc, kernel, v_prev);
            ModeInfo mi = mode(pf.fit);
            Interval iv = threshold_interval(pf.fit, rc.tau);
            res.flat_top = mi.flat_top;
            res.has_interval = true;
            res.interval_lo = x;
            res.interval_hi = x;
            axpy(iv.lo, pf.v, res.interval_lo);
            axpy(iv.hi, pf.v, res.interval_hi);
        }
    } catch (const degenerate_sample_error& e) {
        res.point = x;
        res.converged = false;
        res.has_interval = false;
        res.note = e.what();
    } catch (const empty_neighborhood_error& e) {
        res.point = x;
        res.converged = false;
        res.has_interval = false;
        res.note = e.what();
    }
    return res;
}

} // namespace

MeanShiftVector mean_shift_step(const PointCloud& data, const Vec& x, double h,
                                const Kernel& kernel)
{
    if (x.size() != data.d)
        throw input_error("mean shift: query dimension does not match the data");
    if (!(h > 0.0)) throw input_error("mean shift: bandwidth must be positive");

    const double inv_h2 = 1.0 / (h * h);
    double wsum = 0.0;
    Vec mean(data.d, 0.0);
    for (std::size_t i = 0; i < data.n; ++i) {
        const double* p = data.point(i);
        double q = 0.0;
        for (std::size_t k = 0; k < data.d; ++k) {
            const double dk = p[k] - x[k];
            q += dk * dk;
        }
        const double g = kernel.shadow_profile(q * inv_h2);
        wsum += g;
        for (std::size_t k = 0; k < data.d; ++k) mean[k] += g * p[k];
    }
    if (wsum <= 1e-300)
        throw empty_neighborhood_error("mean shift: every shadow weight underflowed");
    MeanShiftVector ms;
    ms.m.resize(data.d);
    for (std::size_t k = 0; k < data.d; ++k) ms.m[k] = mean[k] / wsum - x[k];
    return ms;
}

RidgeResult mean_shift(const PointCloud& data, const Vec& start, const SearchConfig& cfg)
{
    check_start(data, start);
    ResolvedConfig rc = resolve(cfg, data.d);
    const Kernel kernel = gaussian_kernel(data.d);

    RidgeResult res;
    res.start = start;
    if (rc.record_trace) res.trace.push_back(start);
    Vec x = start;
    for (std::size_t it = 1; it <= rc.max_iter; ++it) {
#ifndef NDEBUG
        const double f_before = kde_value(data, x, rc.h, kernel);
#endif
        MeanShiftVector ms = mean_shift_step(data, x, rc.h, kernel);
        axpy(1.0, ms.m, x);
        res.iterations = it;
        if (rc.record_trace) res.trace.push_back(x);
#ifndef NDEBUG
        assert(kde_value(data, x, rc.h, kernel) >= f_before - 1e-12);
#endif
        if (norm(ms.m) <= rc.tol) {
            res.converged = true;
            break;
        }
    }
    res.point = x;
    return res;
}

RidgeResult scms(const PointCloud& data, const Vec& start, const SearchConfig& cfg)
{
    check_start(data, start);
    if (data.d < 2)
        throw input_error("subspace-constrained mean shift needs dimension >= 2");
    ResolvedConfig rc = resolve(cfg, data.d);

    RidgeResult res;
    res.start = start;
    if (rc.record_trace) res.trace.push_back(start);
    Vec x = start;
    try {
        for (std::size_t it = 1; it <= rc.max_iter; ++it) {
            LogDensityDerivatives ld = log_density_derivatives(data, x, rc.h);

            // Stop once the gradient aligns with an eigenvector of the
            // Hessian: |g'Hg| >= (1 - tol) |g| |Hg|.
            Vec hg = mat_vec(ld.hess, ld.grad);
            const double align = std::abs(dot(ld.grad, hg));
            if (align >= (1.0 - rc.tol) * norm(ld.grad) * norm(hg)) {
                res.converged = true;
                break;
            }

            // Project the mean shift onto the d-s trailing eigendirections.
            SpectralDecomposition dec = spectral(ld.hess);
            Mat proj = perp_projector(dec, rc.s);
            Vec m = ld.grad;
            for (double& c : m) c *= rc.h * rc.h; // Gaussian mean shift
            Vec step = mat_vec(proj, m);
            axpy(1.0, step, x);
            res.iterations = it;
            if (rc.record_trace) res.trace.push_back(x);
            if (norm(step) <= rc.tol * rc.h) {
                res.converged = true;
                break;
            }
        }
    } catch (const empty_neighborhood_error& e) {
        res.note = e.what();
        res.converged = false;
    }
    res.point = x;
    return res;
}

RidgeResult lcrs(const PointCloud& data, const Vec& start, const SearchConfig& cfg)
{
    return lcrs_like(data, start, cfg, false);
}

RidgeResult slcrs(const PointCloud& data, const Vec& start, const SearchConfig& cfg)
{
    return lcrs_like(data, start, cfg, true);
}

std::vector<Vec> starting_grid(const PointCloud& data, double spacing, double max_dist)
{
    if (data.n == 0 || data.d == 0) throw input_error("starting grid: data is empty");
    if (!(spacing > 0.0) || !(max_dist > 0.0))
        throw input_error("starting grid: spacing and max_dist must be positive");

    const std::size_t d = data.d;
    Vec lo(d, kInfinity), hi(d, -kInfinity);
    for (std::size_t i = 0; i < data.n; ++i) {
        const double* p = data.point(i);
        for (std::size_t k = 0; k < d; ++k) {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    }
    std::vector<std::size_t> counts(d);
    for (std::size_t k = 0; k < d; ++k)
        counts[k] = static_cast<std::size_t>(
                        std::floor((hi[k] - lo[k]) / spacing + 1e-9)) + 1;

    std::vector<Vec> grid;
    std::vector<std::size_t> idx(d, 0);
    const double max_sq = max_dist * max_dist;
    Vec node(d);
    while (true) {
        for (std::size_t k = 0; k < d; ++k) node[k] = lo[k] + spacing * static_cast<double>(idx[k]);
        double best = kInfinity;
        for (std::size_t i = 0; i < data.n && best > max_sq; ++i) {
            const double* p = data.point(i);
            double q = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double dk = p[k] - node[k];
                q += dk * dk;
            }
            best = std::min(best, q);
        }
        if (best <= max_sq) grid.push_back(node);
        // Odometer increment, last axis fastest.
        std::size_t k = d;
        while (k-- > 0) {
            if (++idx[k] < counts[k]) break;
            idx[k] = 0;
            if (k == 0) return grid;
        }
    }
}

RidgeResult run_search(const PointCloud& data, const Vec& start, const SearchConfig& cfg)
{
    switch (cfg.variant) {
    case Variant::MeanShift: return mean_shift(data, start, cfg);
    case Variant::SCMS: return scms(data, start, cfg);
    case Variant::LCRS: return lcrs(data, start, cfg);
    case Variant::SLCRS: return slcrs(data, start, cfg);
    }
    throw input_error("search: unknown variant");
}

namespace {

RidgeResult guarded_search(const PointCloud& data, const Vec& start, const SearchConfig& cfg)
{
    try {
        return run_search(data, start, cfg);
    } catch (const error& e) {
        RidgeResult res;
        res.start = start;
        res.point = start;
        res.converged = false;
        res.note = e.what();
        return res;
    }
}

} // namespace

std::vector<RidgeResult> run_searches(const PointCloud& data, const std::vector<Vec>& starts,
                                      const SearchConfig& cfg)
{
    std::vector<RidgeResult> out(starts.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(starts.size()); ++i)
        out[static_cast<std::size_t>(i)] =
            guarded_search(data, starts[static_cast<std::size_t>(i)], cfg);
    return out;
}

std::vector<RidgeResult> run_searches_serial(const PointCloud& data,
                                             const std::vector<Vec>& starts,
                                             const SearchConfig& cfg)
{
    std::vector<RidgeResult> out;
    out.reserve(starts.size());
    for (const Vec& s : starts) out.push_back(guarded_search(data, s, cfg));
    return out;
}

} // namespace ridge
