#pragma once

#include <string>

#include "ridge/csv.hpp"
#include "ridge/pointcloud.hpp"

// Static SVG rendering of a run: data as light markers, converged ridge
// points as dark markers, threshold intervals as line segments, equal-aspect
// axes with labeled ticks.  Output is deterministic byte-for-byte for fixed
// inputs.  Only the first two coordinates are drawn.

namespace ridge {

void write_plot_svg(const PointCloud& data, const ResultsTable& results,
                    const std::string& path);

} // namespace ridge
