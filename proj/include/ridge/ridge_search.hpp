#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ridge/kernels.hpp"
#include "ridge/linalg.hpp"
#include "ridge/pointcloud.hpp"

// The four iterative searches over a kernel-smoothed point cloud: mean shift
// (mode seeking), subspace-constrained mean shift (KDE ridges), and the
// log-concave ridge search in plain and smoothed form.  All four drive the
// Gaussian kernel; the engine runs many starts concurrently over shared
// immutable data.

namespace ridge {

enum class Variant { MeanShift, SCMS, LCRS, SLCRS };

struct SearchConfig {
    Variant variant = Variant::LCRS;
    double h = 1.0;
    double tol = 0.0;          // <= 0 selects the default 1e-4 * h
    std::size_t max_iter = 500;
    double tau = 0.9;          // threshold-interval level
    int ridge_dim = -1;        // s; -1 selects d-1
    double min_n_eff = 5.0;    // effective neighborhood floor for directions
    bool record_trace = false;
};

struct MeanShiftVector {
    Vec m; // shadow-kernel weighted mean minus the query point
};

struct RidgeResult {
    Vec start;
    Vec point;
    std::size_t iterations = 0;
    bool converged = false;
    bool has_interval = false; // LCRS fills threshold-interval endpoints
    Vec interval_lo, interval_hi;
    bool flat_top = false;
    std::string note;          // diagnostic when a search ends degenerately
    std::vector<Vec> trace;    // iterates, when record_trace is set
};

// One mean-shift displacement at x.  Throws empty_neighborhood_error when
// every shadow weight underflows.
MeanShiftVector mean_shift_step(const PointCloud& data, const Vec& x, double h,
                                const Kernel& kernel);

// Iterate x <- x + m until ||m|| <= tol or max_iter; the KDE value is
// non-decreasing along the iterates (asserted in debug builds).
RidgeResult mean_shift(const PointCloud& data, const Vec& start, const SearchConfig& cfg);

// Project the mean shift onto the d-s trailing eigendirections of the
// log-density Hessian; stop once the gradient aligns with an eigenvector
// (|g'Hg| >= (1-tol)|g||Hg|) or the projected step falls below tol*h.
RidgeResult scms(const PointCloud& data, const Vec& start, const SearchConfig& cfg);

// Log-concave ridge search: step along the smallest-eigenvalue direction of
// the conditional covariance to the mode of the weighted log-concave fit of
// the projected sample; report the tau-threshold interval at the final point.
// A degenerate projected sample ends the search with converged=false and a
// note instead of an exception.
RidgeResult lcrs(const PointCloud& data, const Vec& start, const SearchConfig& cfg);

// LCRS with the fit mode replaced by the mode of its variance-matched
// Gaussian smoothing; no interval is reported.
RidgeResult slcrs(const PointCloud& data, const Vec& start, const SearchConfig& cfg);

// Axis-aligned grid over the data bounding box, keeping nodes within
// max_dist of at least one data point.
std::vector<Vec> starting_grid(const PointCloud& data, double spacing, double max_dist);

// Dispatch on cfg.variant.
RidgeResult run_search(const PointCloud& data, const Vec& start, const SearchConfig& cfg);

// Engine: one result per start, in start order.  Searches run concurrently
// (run_searches) or on the calling thread (run_searches_serial); both return
// bit-identical results.  Per-start failures become converged=false results
// with the diagnostic in `note`.
std::vector<RidgeResult> run_searches(const PointCloud& data, const std::vector<Vec>& starts,
                                      const SearchConfig& cfg);
std::vector<RidgeResult> run_searches_serial(const PointCloud& data,
                                             const std::vector<Vec>& starts,
                                             const SearchConfig& cfg);

} // namespace ridge
