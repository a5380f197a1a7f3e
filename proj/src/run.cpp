#include "ridge/run.hpp"

#include <chrono>

#include "ridge/bandwidth.hpp"
#include "ridge/errors.hpp"

namespace ridge {

RunSummary run(const RunManifest& manifest)
{
    if (manifest.input_path.empty())
        throw input_error("run: input path is required");
    if (manifest.output_path.empty())
        throw input_error("run: output path is required");
    if (!(manifest.grid_spacing > 0.0) || !(manifest.grid_max_dist > 0.0))
        throw input_error("run: grid spacing and max distance must be positive");
    switch (manifest.h_source) {
    case HSource::Explicit:
        if (!(manifest.h_value > 0.0))
            throw input_error("run: explicit bandwidth must be positive");
        break;
    case HSource::Silverman:
        if (!(manifest.silverman_a0 > 0.0))
            throw input_error("run: Silverman constant must be positive");
        break;
    case HSource::Emst:
        break;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const PointCloud data = ingest(manifest.input_path, manifest.filters);

    double h = 0.0;
    switch (manifest.h_source) {
    case HSource::Explicit: h = manifest.h_value; break;
    case HSource::Silverman: h = silverman_bandwidth(data, manifest.silverman_a0); break;
    case HSource::Emst: h = emst_bandwidth(data); break;
    }

    SearchConfig cfg;
    cfg.variant = manifest.variant;
    cfg.h = h;
    cfg.tol = manifest.tol;
    cfg.tau = manifest.tau;
    cfg.record_trace = !manifest.trace_path.empty();

    const std::vector<Vec> starts =
        starting_grid(data, manifest.grid_spacing, manifest.grid_max_dist);
    const std::vector<RidgeResult> results = run_searches(data, starts, cfg);

    write_results(results, data.d, manifest.output_path);
    if (!manifest.trace_path.empty())
        write_traces(results, data.d, manifest.trace_path);

    RunSummary summary;
    summary.n_points = data.n;
    summary.n_starts = starts.size();
    for (const RidgeResult& r : results)
        if (r.converged) ++summary.n_converged;
    summary.h = h;
    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

} // namespace ridge
