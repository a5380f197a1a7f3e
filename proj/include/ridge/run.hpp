#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ridge/csv.hpp"
#include "ridge/ridge_search.hpp"

// One end-to-end ridge run: ingest, bandwidth resolution, grid generation,
// concurrent searches, and result emission.

namespace ridge {

enum class HSource { Explicit, Silverman, Emst };

struct RunManifest {
    std::string input_path;
    Variant variant = Variant::LCRS;
    HSource h_source = HSource::Explicit; // exactly one source
    double h_value = 0.0;                 // Explicit
    double silverman_a0 = 0.0;            // Silverman
    double tol = 0.0;                     // <= 0 selects 1e-4 * h
    double tau = 0.9;
    double grid_spacing = 0.5;
    double grid_max_dist = 0.5;
    std::uint64_t seed = 0; // recorded for provenance; the run itself is deterministic
    std::string output_path;
    std::string trace_path; // empty: no trace sidecar
    std::vector<ColumnFilter> filters;
};

struct RunSummary {
    std::size_t n_points = 0;
    std::size_t n_starts = 0;
    std::size_t n_converged = 0;
    double h = 0.0;
    double wall_seconds = 0.0;
};

// Validates the manifest, executes the run, writes the results CSV (and the
// optional trace sidecar), and returns the summary for the caller to log.
RunSummary run(const RunManifest& manifest);

} // namespace ridge
