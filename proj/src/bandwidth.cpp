#include "ridge/bandwidth.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ridge/errors.hpp"

namespace ridge {

double silverman_bandwidth(const PointCloud& data, double a0) {
    if (!(a0 > 0.0)) throw input_error("silverman_bandwidth: A0 must be positive");
    if (data.n < 2)
        throw degenerate_sample_error("silverman_bandwidth: need at least two points");
    const std::size_t n = data.n, d = data.d;

    double sigma_min = std::numeric_limits<double>::infinity();
    std::size_t worst = 0;
    bool any_positive = false;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += data.point(i)[j];
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = data.point(i)[j] - mean;
            ss += c * c;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (sd > 0.0) any_positive = true;
        if (sd < sigma_min) {
            sigma_min = sd;
            worst = j;
        }
    }
    if (!any_positive)
        throw degenerate_sample_error("silverman_bandwidth: all coordinates constant");
    if (!(sigma_min > 0.0))
        throw degenerate_sample_error("silverman_bandwidth: coordinate " +
                                      std::to_string(worst) + " has zero variance");

    const double inv = -1.0 / (static_cast<double>(d) + 4.0);
    return a0 * std::pow(static_cast<double>(d) + 2.0, inv) *
           std::pow(static_cast<double>(n), inv) * sigma_min;
}

namespace {

double dist2(const PointCloud& data, std::size_t i, std::size_t j) {
    const double* a = data.point(i);
    const double* b = data.point(j);
    double s = 0.0;
    for (std::size_t k = 0; k < data.d; ++k) {
        const double c = a[k] - b[k];
        s += c * c;
    }
    return s;
}

// Exact Prim over the dense distance matrix.  `best` holds the squared
// distance from each outside vertex to the tree; every step scans for the
// closest outside vertex (ties resolved toward the smallest index, so the
// parallel and serial versions produce the same tree).
EmstResult prim(const PointCloud& data, bool parallel) {
    const std::size_t n = data.n;
    if (n == 0) throw input_error("emst: empty point cloud");
    EmstResult result;
    if (n == 1) return result;

    std::vector<double> best(n);
    std::vector<std::size_t> from(n, 0);
    std::vector<char> in_tree(n, 0);
    in_tree[0] = 1;
    for (std::size_t i = 1; i < n; ++i) best[i] = dist2(data, 0, i);

    result.edges.reserve(n - 1);
    for (std::size_t step = 1; step < n; ++step) {
        double bd = std::numeric_limits<double>::infinity();
        std::size_t bi = n;
        if (parallel) {
#pragma omp parallel
            {
                double td = std::numeric_limits<double>::infinity();
                std::size_t ti = n;
#pragma omp for nowait
                for (long i = 1; i < static_cast<long>(n); ++i) {
                    const auto u = static_cast<std::size_t>(i);
                    if (in_tree[u]) continue;
                    if (best[u] < td || (best[u] == td && u < ti)) {
                        td = best[u];
                        ti = u;
                    }
                }
#pragma omp critical
                if (td < bd || (td == bd && ti < bi)) {
                    bd = td;
                    bi = ti;
                }
            }
        } else {
            for (std::size_t u = 1; u < n; ++u) {
                if (in_tree[u]) continue;
                if (best[u] < bd || (best[u] == bd && u < bi)) {
                    bd = best[u];
                    bi = u;
                }
            }
        }

        in_tree[bi] = 1;
        result.edges.emplace_back(from[bi], bi);
        result.total_length += std::sqrt(bd);

        if (parallel) {
#pragma omp parallel for
            for (long i = 1; i < static_cast<long>(n); ++i) {
                const auto u = static_cast<std::size_t>(i);
                if (in_tree[u]) continue;
                const double d2 = dist2(data, bi, u);
                if (d2 < best[u]) {
                    best[u] = d2;
                    from[u] = bi;
                }
            }
        } else {
            for (std::size_t u = 1; u < n; ++u) {
                if (in_tree[u]) continue;
                const double d2 = dist2(data, bi, u);
                if (d2 < best[u]) {
                    best[u] = d2;
                    from[u] = bi;
                }
            }
        }
    }
    return result;
}

} // namespace

EmstResult emst(const PointCloud& data) { return prim(data, true); }
EmstResult emst_serial(const PointCloud& data) { return prim(data, false); }

double emst_bandwidth(const PointCloud& data) {
    if (data.n < 2)
        throw degenerate_sample_error("emst_bandwidth: need at least two points");
    const double ln = emst(data).total_length;
    return std::pow(ln / static_cast<double>(data.n),
                    1.0 / (static_cast<double>(data.d) + 4.0));
}

} // namespace ridge
