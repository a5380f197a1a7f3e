#include "ridge/symmetric_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ridge/errors.hpp"

namespace ridge {

namespace {

double off_diagonal_norm(const Mat& a) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.rows(); ++p)
        for (std::size_t q = 0; q < a.cols(); ++q)
            if (p != q) s += a(p, q) * a(p, q);
    return std::sqrt(s);
}

// Make the first non-negligible component positive so eigenvector signs do
// not depend on rotation history.
void fix_sign(Mat& v, std::size_t col) {
    const std::size_t d = v.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < d; ++i) scale = std::max(scale, std::abs(v(i, col)));
    for (std::size_t i = 0; i < d; ++i) {
        if (std::abs(v(i, col)) > 1e-12 * scale) {
            if (v(i, col) < 0.0)
                for (std::size_t r = 0; r < d; ++r) v(r, col) = -v(r, col);
            return;
        }
    }
}

} // namespace

SpectralDecomposition spectral(const Mat& m) {
    const std::size_t d = m.rows();
    if (d == 0 || m.cols() != d)
        throw input_error("spectral: matrix must be square and non-empty");
    if (d > 8)
        throw input_error("spectral: cyclic Jacobi solver is limited to d <= 8");

    double scale = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(m(i, j)))
                throw input_error("spectral: matrix has non-finite entries");
            scale = std::max(scale, std::abs(m(i, j)));
        }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-10 * std::max(1.0, scale))
                throw input_error("spectral: matrix is not symmetric");

    Mat a(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));

    Mat v = Mat::identity(d);
    const double frob = frobenius_norm(a);
    const double stop = std::max(1e-300, 1e-15 * frob);

    // Cyclic Jacobi: sweep all (p,q) pairs in a fixed order, so the result is
    // deterministic; quadratic convergence makes ~6 sweeps plenty for d <= 8.
    for (int sweep = 0; sweep < 64 && off_diagonal_norm(a) > stop; ++sweep) {
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < d; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < d; ++j) {
                    const double apj = a(p, j), aqj = a(q, j);
                    a(p, j) = c * apj - s * aqj;
                    a(q, j) = s * apj + c * aqj;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    SpectralDecomposition dec;
    dec.eigenvalues.resize(d);
    dec.vectors = Mat(d, d);

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    for (std::size_t j = 0; j < d; ++j) {
        dec.eigenvalues[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < d; ++i) dec.vectors(i, j) = v(i, order[j]);
        fix_sign(dec.vectors, j);
    }

    // Within numerically tied eigenvalue blocks the rotation order would
    // otherwise decide the column order; pin it lexicographically.
    const double tie = 1e-12 * std::max(1.0, frob);
    std::size_t lo = 0;
    while (lo < d) {
        std::size_t hi = lo + 1;
        while (hi < d && dec.eigenvalues[lo] - dec.eigenvalues[hi] <= tie) ++hi;
        if (hi - lo > 1) {
            std::vector<std::size_t> cols(hi - lo);
            std::iota(cols.begin(), cols.end(), lo);
            Mat block = dec.vectors;
            std::stable_sort(cols.begin(), cols.end(), [&](std::size_t x, std::size_t y) {
                for (std::size_t i = 0; i < d; ++i) {
                    if (block(i, x) != block(i, y)) return block(i, x) < block(i, y);
                }
                return false;
            });
            Vec vals(hi - lo);
            for (std::size_t j = lo; j < hi; ++j) {
                vals[j - lo] = dec.eigenvalues[cols[j - lo]];
                for (std::size_t i = 0; i < d; ++i)
                    dec.vectors(i, j) = block(i, cols[j - lo]);
            }
            for (std::size_t j = lo; j < hi; ++j) dec.eigenvalues[j] = vals[j - lo];
        }
        lo = hi;
    }
    return dec;
}

double eigengap(const SpectralDecomposition& dec, std::size_t s) {
    const std::size_t d = dec.eigenvalues.size();
    if (s < 1 || s >= d) throw input_error("eigengap: split index out of range");
    return dec.eigenvalues[s - 1] - dec.eigenvalues[s];
}

Mat v_perp(const SpectralDecomposition& dec, std::size_t s) {
    const std::size_t d = dec.eigenvalues.size();
    if (s >= d) throw input_error("v_perp: split index out of range");
    Mat out(d, d - s);
    for (std::size_t j = s; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) out(i, j - s) = dec.vectors(i, j);
    return out;
}

Mat perp_projector(const SpectralDecomposition& dec, std::size_t s) {
    const Mat vp = v_perp(dec, s);
    const std::size_t d = vp.rows();
    Mat p(d, d);
    for (std::size_t j = 0; j < vp.cols(); ++j) {
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) p(r, c) += vp(r, j) * vp(c, j);
    }
    return p;
}

double subspace_distance(const SpectralDecomposition& a,
                         const SpectralDecomposition& b, std::size_t s) {
    if (a.eigenvalues.size() != b.eigenvalues.size())
        throw input_error("subspace_distance: dimension mismatch");
    return frobenius_norm(perp_projector(a, s) - perp_projector(b, s));
}

} // namespace ridge
