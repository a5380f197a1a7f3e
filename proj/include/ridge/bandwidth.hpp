#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ridge/pointcloud.hpp"

// Bandwidth selection: a Silverman-style normal-reference rule and a rule
// based on the total length of the Euclidean minimum spanning tree of the
// data.  The EMST is exact (Prim over the dense distance matrix); the
// candidate scan is OpenMP-parallel with a serial reference kept for testing.

namespace ridge {

// h = A0 * (d+2)^{-1/(d+4)} * n^{-1/(d+4)} * sigma_min, where sigma_min is
// the smallest per-coordinate sample standard deviation.
double silverman_bandwidth(const PointCloud& data, double a0);

struct EmstResult {
    std::vector<std::pair<std::size_t, std::size_t>> edges; // n-1 edges
    double total_length = 0.0;
};

EmstResult emst(const PointCloud& data);
EmstResult emst_serial(const PointCloud& data);

// h = (L_n / n)^{1/(d+4)}, L_n the EMST total length.
double emst_bandwidth(const PointCloud& data);

} // namespace ridge
