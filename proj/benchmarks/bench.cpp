#include <chrono>
#include <cstdio>
#include <functional>

#include "ridge/bandwidth.hpp"
#include "ridge/circle_oracle.hpp"
#include "ridge/ridge_search.hpp"

// Wall-clock comparison of the OpenMP engines against their serial reference
// implementations.  Both variants must agree bit-for-bit; the speedup column
// reports whatever the machine offers (1x on a single-core host).

namespace {

double time_once(const std::function<void()>& f)
{
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel, bool identical)
{
    std::printf("%-14s serial %8.3fs   parallel %8.3fs   speedup %5.2fx   %s\n", name,
                serial, parallel, serial / parallel,
                identical ? "results identical" : "RESULTS DIFFER");
}

} // namespace

int main()
{
    using namespace ridge;

    // Ridge searches over a starting grid.
    {
        const PointCloud data = sample_circle(400, 1.0, 0.1, 17);
        SearchConfig cfg;
        cfg.variant = Variant::LCRS;
        cfg.h = 0.3;
        const std::vector<Vec> starts = starting_grid(data, 0.25, 0.25);
        std::vector<RidgeResult> par, ser;
        const double tp = time_once([&] { par = run_searches(data, starts, cfg); });
        const double ts = time_once([&] { ser = run_searches_serial(data, starts, cfg); });
        bool same = par.size() == ser.size();
        for (std::size_t i = 0; same && i < par.size(); ++i)
            same = par[i].point == ser[i].point && par[i].iterations == ser[i].iterations;
        report("run_searches", ts, tp, same);
    }

    // Euclidean minimum spanning tree.
    {
        const PointCloud data = sample_circle(4000, 1.0, 0.1, 19);
        EmstResult par, ser;
        const double tp = time_once([&] { par = emst(data); });
        const double ts = time_once([&] { ser = emst_serial(data); });
        report("emst", ts, tp,
               par.total_length == ser.total_length && par.edges == ser.edges);
    }

    // Hausdorff distance between two clouds.
    {
        const PointCloud a = sample_circle(3000, 1.0, 0.1, 23);
        const PointCloud b = sample_circle(3000, 1.0, 0.2, 29);
        double par = 0.0, ser = 0.0;
        const double tp = time_once([&] { par = hausdorff(a, b); });
        const double ts = time_once([&] { ser = hausdorff_serial(a, b); });
        report("hausdorff", ts, tp, par == ser);
    }
    return 0;
}
