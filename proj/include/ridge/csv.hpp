#pragma once

#include <string>
#include <vector>

#include "ridge/pointcloud.hpp"
#include "ridge/ridge_search.hpp"

// CSV ingestion and emission.  Numbers are serialized with 17 significant
// digits, so emit followed by ingest reproduces every double bit-exactly.
// The results header is a frozen contract:
//   start_1..start_d, point_1..point_d, iterations, converged,
//   int_lo_1..int_lo_d, int_hi_1..int_hi_d, flat_top
// with interval cells left empty for variants that do not produce them.

namespace ridge {

struct ColumnFilter {
    std::string column; // header name, or a 0-based index when no name matches
    double lo = 0.0, hi = 0.0;
};

// Parse a "col:lo:hi" specification.
ColumnFilter parse_filter(const std::string& spec);

// Read a headed numeric CSV, keeping rows inside every closed filter box.
PointCloud ingest(const std::string& path, const std::vector<ColumnFilter>& filters = {});

void emit(const PointCloud& cloud, const std::string& path);

std::string format_g17(double v);

void write_results(const std::vector<RidgeResult>& results, std::size_t d,
                   const std::string& path);

// Minimal reader for result files (evaluate/plot consume these).
struct ResultsTable {
    std::size_t d = 0;
    std::vector<RidgeResult> rows;
};

ResultsTable read_results(const std::string& path);

// Iterate traces as one flat table: start_index, iteration, x_1..x_d.
void write_traces(const std::vector<RidgeResult>& results, std::size_t d,
                  const std::string& path);

} // namespace ridge
