#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

#include "ridge/linalg.hpp"

// Adaptive Gauss-Kronrod (G7,K15) quadrature, one-dimensional and nested
// tensor-product over a box.  Every result carries a convergence flag; callers
// that report condition checks must propagate "undetermined" rather than
// trusting a non-converged value.

namespace ridge {

struct QuadResult {
    double value = 0.0;
    double error = 0.0; // conservative absolute-error estimate
    bool converged = true;
};

namespace detail {

// QUADPACK qk15 abscissae (positive half) and weights.
inline constexpr double gk_nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
inline constexpr double kronrod_w[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
inline constexpr double gauss_w[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

template <class F>
void gk15(const F& f, double a, double b, double& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fk = 0.0, fg = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double x = h * gk_nodes[i];
        const double v = (i == 7) ? f(c) : f(c - x) + f(c + x);
        fk += kronrod_w[i] * v;
        if (i % 2 == 1 && i < 7) fg += gauss_w[i / 2] * v; // Gauss nodes are 1, 3, 5
        if (i == 7) fg += gauss_w[3] * v;                  // ... plus the center
    }
    kronrod = fk * h;
    err = std::abs(kronrod - fg * h);
}

// Refine the cell [a, b] whose gk15 estimate (v, e) the caller has already
// computed.  `stall` counts consecutive splits that failed to shrink the
// estimate; `evals_left` is the shared work budget for the whole call tree.
template <class F>
QuadResult adapt(const F& f, double a, double b, double tol, int depth, double v,
                 double e, int stall, long* evals_left) {
    if (e <= tol || depth <= 0 || *evals_left <= 0) {
        return {v, e, e <= tol};
    }
    *evals_left -= 30;
    const double c = 0.5 * (a + b);
    double vl, el, vr, er;
    gk15(f, a, c, vl, el);
    gk15(f, c, b, vr, er);
    const double total = el + er;
    if (total <= tol) {
        return {vl + vr, total, true};
    }
    // Stop once two successive splits fail to shrink the estimate.  That
    // happens when the cell sits at a resolution floor the estimator cannot
    // see below -- typically noise in the integrand values themselves, e.g.
    // nested quadrature results that wobble at the scale of their own
    // residual error.  Halving such a cell halves both the error and the
    // budget, so recursion would run to full depth with no progress.  A jump
    // or kink is different: there one child is smooth, the total drops
    // geometrically, and the counter resets.
    stall = total >= 0.9 * e ? stall + 1 : 0;
    if (stall >= 2) {
        return {vl + vr, total, false};
    }
    // Split the error budget in proportion to each half's estimated error
    // rather than evenly.  An even split starves the difficult half, while
    // the floor keeps a nearly-converged half from being handed a budget
    // below round-off.
    const double tol_l = std::max(tol * (el / total), 1e-3 * tol);
    const double tol_r = std::max(tol * (er / total), 1e-3 * tol);
    const QuadResult left =
        el <= tol_l ? QuadResult{vl, el, true}
                    : adapt(f, a, c, tol_l, depth - 1, vl, el, stall, evals_left);
    const QuadResult right =
        er <= tol_r ? QuadResult{vr, er, true}
                    : adapt(f, c, b, tol_r, depth - 1, vr, er, stall, evals_left);
    return {left.value + right.value, left.error + right.error,
            left.converged && right.converged};
}

// A single Gauss-Kronrod panel sees only its 15 nodes: a feature much
// narrower than the panel can fall between them and leave no trace in either
// the value or the error estimate, so the panel "converges" to a wrong
// answer.  Starting from a fixed partition bounds how narrow an invisible
// feature can be, independent of the interval length.
template <class F>
QuadResult adapt_panels(const F& f, double a, double b, double tol, int depth,
                        long* evals_left) {
    constexpr int n_panels = 8;
    double v[n_panels], e[n_panels];
    const double w = (b - a) / n_panels;
    double total = 0.0;
    *evals_left -= 15 * n_panels;
    for (int i = 0; i < n_panels; ++i) {
        gk15(f, a + i * w, a + (i + 1) * w, v[i], e[i]);
        total += e[i];
    }
    QuadResult out{0.0, 0.0, true};
    if (total <= tol) {
        for (int i = 0; i < n_panels; ++i) {
            out.value += v[i];
            out.error += e[i];
        }
        return out;
    }
    for (int i = 0; i < n_panels; ++i) {
        const double share = std::max(tol * (e[i] / total), 1e-3 * tol);
        const QuadResult r = e[i] <= share
                                 ? QuadResult{v[i], e[i], true}
                                 : adapt(f, a + i * w, a + (i + 1) * w, share, depth - 1,
                                         v[i], e[i], 0, evals_left);
        out.value += r.value;
        out.error += r.error;
    }
    // Convergence is a statement about the accumulated total, not about every
    // leaf meeting its own share: a branch that stopped at its resolution
    // floor still counts if the overall estimate honors the request.
    out.converged = out.error <= tol;
    return out;
}

inline QuadResult box_impl(const std::function<double(const Vec&)>& f, const Vec& lo,
                           const Vec& hi, double tol, int max_depth, long* evals_left) {
    const std::size_t d = lo.size();
    if (d == 1) {
        return adapt_panels([&](double x) { return f(Vec{x}); }, lo[0], hi[0], tol,
                            max_depth, evals_left);
    }
    bool inner_ok = true;
    const Vec lo_rest(lo.begin() + 1, lo.end());
    const Vec hi_rest(hi.begin() + 1, hi.end());
    // The inner dimensions get a small slice of the budget on purpose.  Inner
    // results wobble at the scale of their residual error as the outer
    // variable sweeps (the accepted subdivision pattern shifts), and the outer
    // refinement can never push its estimate below that noise floor.  Keeping
    // the floor well under the outer budget is what lets the outer loop
    // terminate; the inner integrals converge almost exactly regardless.
    const double inner_tol = 0.05 * tol / (hi[0] - lo[0]);
    auto outer = [&](double x0) {
        Vec point(d);
        point[0] = x0;
        auto slice = [&](const Vec& rest) {
            for (std::size_t i = 1; i < d; ++i) point[i] = rest[i - 1];
            return f(point);
        };
        const QuadResult r =
            box_impl(slice, lo_rest, hi_rest, inner_tol, max_depth, evals_left);
        inner_ok = inner_ok && r.converged;
        return r.value;
    };
    QuadResult r = adapt_panels(outer, lo[0], hi[0], 0.95 * tol, max_depth, evals_left);
    r.converged = r.converged && inner_ok;
    r.error += 0.05 * tol; // budget handed to the inner dimensions
    return r;
}

} // namespace detail

// `max_evals` caps the number of integrand evaluations; when a pathological
// integrand exhausts it, the result honestly reports non-convergence instead
// of hanging.
template <class F>
QuadResult integrate(const F& f, double a, double b, double tol = 1e-10,
                     int max_depth = 40, long max_evals = 50'000'000) {
    long evals_left = max_evals;
    return detail::adapt_panels(f, a, b, tol, max_depth, &evals_left);
}

// Nested adaptive integration of f over the box [lo, hi].  Inner dimensions
// get a proportionally tighter tolerance so the total honors `tol`.  The
// integrand is type-erased: the recursion peels one dimension per level, and
// a template would instantiate itself forever.  The evaluation budget is
// shared across the entire nest.
inline QuadResult integrate_box(const std::function<double(const Vec&)>& f, const Vec& lo,
                                const Vec& hi, double tol = 1e-8, int max_depth = 30,
                                long max_evals = 200'000'000) {
    long evals_left = max_evals;
    return detail::box_impl(f, lo, hi, tol, max_depth, &evals_left);
}

} // namespace ridge
