#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ridge/linalg.hpp"

namespace ridge {

// A flat, row-major set of n points in d dimensions with optional column
// labels (carried through CSV ingest so filters can address columns by name).
struct PointCloud {
    std::size_t n = 0;
    std::size_t d = 0;
    Vec coords;                      // n * d values, point i at [i*d, i*d+d)
    std::vector<std::string> labels; // empty or size d

    const double* point(std::size_t i) const { return coords.data() + i * d; }

    Vec point_vec(std::size_t i) const {
        return Vec(coords.begin() + static_cast<std::ptrdiff_t>(i * d),
                   coords.begin() + static_cast<std::ptrdiff_t>(i * d + d));
    }

    void push_back(const Vec& p) {
        coords.insert(coords.end(), p.begin(), p.end());
        ++n;
    }

    bool operator==(const PointCloud&) const = default;
};

} // namespace ridge
