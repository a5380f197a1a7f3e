#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ridge/bandwidth.hpp"
#include "ridge/circle_oracle.hpp"
#include "ridge/csv.hpp"
#include "ridge/errors.hpp"
#include "ridge/run.hpp"
#include "ridge/svg.hpp"

namespace {

ridge::Variant parse_algorithm(const std::string& name)
{
    if (name == "mean-shift") return ridge::Variant::MeanShift;
    if (name == "scms") return ridge::Variant::SCMS;
    if (name == "lcrs") return ridge::Variant::LCRS;
    if (name == "slcrs") return ridge::Variant::SLCRS;
    throw ridge::input_error("unknown algorithm '" + name +
                             "' (expected mean-shift, scms, lcrs, or slcrs)");
}

std::vector<ridge::ColumnFilter> parse_filters(const std::vector<std::string>& specs)
{
    std::vector<ridge::ColumnFilter> filters;
    for (const std::string& s : specs) filters.push_back(ridge::parse_filter(s));
    return filters;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Density-ridge estimation from point clouds"};
    app.require_subcommand(1);

    // generate-circle
    auto* gen = app.add_subcommand("generate-circle",
                                   "Sample noisy circle data to a CSV file");
    std::size_t gen_n = 200;
    double gen_r = 1.0, gen_sigma = 0.1;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--n", gen_n, "Number of points")->check(CLI::PositiveNumber);
    gen->add_option("--r", gen_r, "Circle radius")->check(CLI::PositiveNumber);
    gen->add_option("--sigma", gen_sigma, "Noise standard deviation")
        ->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--out", gen_out, "Output CSV path")->required();

    // bandwidth
    auto* bw = app.add_subcommand("bandwidth", "Print a selected bandwidth");
    std::string bw_input;
    double bw_a0 = 0.0;
    bool bw_emst = false;
    std::vector<std::string> bw_filters;
    bw->add_option("--input", bw_input, "Input CSV path")->required();
    auto* bw_sopt = bw->add_option("--silverman", bw_a0, "Silverman rule with constant A0");
    auto* bw_eopt = bw->add_flag("--emst", bw_emst, "Minimum-spanning-tree rule");
    bw_sopt->excludes(bw_eopt);
    bw->add_option("--filter", bw_filters, "Keep rows with col:lo:hi (repeatable)");

    // ridge
    auto* rg = app.add_subcommand("ridge", "Run a ridge search over a starting grid");
    ridge::RunManifest manifest;
    std::string rg_algorithm = "lcrs";
    double rg_h = 0.0, rg_a0 = 0.0;
    bool rg_emst = false;
    std::vector<std::string> rg_filters;
    rg->add_option("--input", manifest.input_path, "Input CSV path")->required();
    rg->add_option("--out", manifest.output_path, "Results CSV path")->required();
    rg->add_option("--algorithm", rg_algorithm,
                   "mean-shift | scms | lcrs | slcrs (default lcrs)");
    auto* rg_hopt = rg->add_option("--h", rg_h, "Explicit bandwidth");
    auto* rg_sopt = rg->add_option("--silverman", rg_a0, "Silverman rule with constant A0");
    auto* rg_eopt = rg->add_flag("--emst", rg_emst, "Minimum-spanning-tree rule");
    rg_hopt->excludes(rg_sopt)->excludes(rg_eopt);
    rg_sopt->excludes(rg_eopt);
    rg->add_option("--tol", manifest.tol, "Convergence tolerance (default 1e-4 * h)");
    rg->add_option("--tau", manifest.tau, "Threshold-interval level (default 0.9)");
    rg->add_option("--grid-spacing", manifest.grid_spacing,
                   "Starting-grid spacing (default 0.5)");
    rg->add_option("--grid-max-dist", manifest.grid_max_dist,
                   "Drop grid nodes farther than this from all data (default 0.5)");
    rg->add_option("--seed", manifest.seed, "Recorded in the manifest");
    rg->add_option("--filter", rg_filters, "Keep rows with col:lo:hi (repeatable)");
    rg->add_option("--trace", manifest.trace_path, "Write an iterate-trace CSV here");

    // true-ridge
    auto* tr = app.add_subcommand("true-ridge",
                                  "Print the analytic circle-model ridge radius");
    double tr_r = 1.0, tr_sigma = 0.1;
    std::size_t tr_points = 0;
    std::string tr_out;
    tr->add_option("--r", tr_r, "Circle radius")->check(CLI::PositiveNumber);
    tr->add_option("--sigma", tr_sigma, "Noise standard deviation")
        ->check(CLI::PositiveNumber);
    tr->add_option("--points", tr_points, "Also emit this many ridge points");
    tr->add_option("--out", tr_out, "Ridge-point CSV path (with --points)");

    // evaluate
    auto* ev = app.add_subcommand(
        "evaluate", "Hausdorff distance between converged results and an oracle set");
    std::string ev_results, ev_oracle;
    ev->add_option("--results", ev_results, "Results CSV path")->required();
    ev->add_option("--oracle", ev_oracle, "Oracle point CSV path")->required();

    // plot
    auto* pl = app.add_subcommand("plot", "Render data and results to an SVG");
    std::string pl_results, pl_data, pl_out;
    pl->add_option("--results", pl_results, "Results CSV path")->required();
    pl->add_option("--data", pl_data, "Data CSV path")->required();
    pl->add_option("--out", pl_out, "Output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            ridge::PointCloud cloud = ridge::sample_circle(gen_n, gen_r, gen_sigma, gen_seed);
            ridge::emit(cloud, gen_out);
            std::cerr << "wrote " << cloud.n << " points to " << gen_out << "\n";
        } else if (bw->parsed()) {
            if (bw_sopt->count() == 0 && !bw_emst)
                throw ridge::input_error("bandwidth: pass --silverman A0 or --emst");
            ridge::PointCloud cloud = ridge::ingest(bw_input, parse_filters(bw_filters));
            const double h = bw_emst ? ridge::emst_bandwidth(cloud)
                                     : ridge::silverman_bandwidth(cloud, bw_a0);
            std::cout << ridge::format_g17(h) << "\n";
        } else if (rg->parsed()) {
            manifest.variant = parse_algorithm(rg_algorithm);
            manifest.filters = parse_filters(rg_filters);
            const int sources = (rg_hopt->count() ? 1 : 0) + (rg_sopt->count() ? 1 : 0) +
                                (rg_emst ? 1 : 0);
            if (sources != 1)
                throw ridge::input_error(
                    "ridge: pass exactly one of --h, --silverman, --emst");
            if (rg_hopt->count()) {
                manifest.h_source = ridge::HSource::Explicit;
                manifest.h_value = rg_h;
            } else if (rg_sopt->count()) {
                manifest.h_source = ridge::HSource::Silverman;
                manifest.silverman_a0 = rg_a0;
            } else {
                manifest.h_source = ridge::HSource::Emst;
            }
            const ridge::RunSummary s = ridge::run(manifest);
            std::cerr << "points=" << s.n_points << " starts=" << s.n_starts
                      << " converged=" << s.n_converged << " h=" << ridge::format_g17(s.h)
                      << " wall_s=" << s.wall_seconds << "\n";
        } else if (tr->parsed()) {
            const double radius = ridge::true_ridge_radius(tr_r, tr_sigma);
            std::cout << ridge::format_g17(radius) << "\n";
            if (tr_points > 0) {
                if (tr_out.empty())
                    throw ridge::input_error("true-ridge: --points needs --out");
                ridge::PointCloud ring;
                ring.d = 2;
                ring.labels = {"x", "y"};
                for (std::size_t i = 0; i < tr_points; ++i) {
                    const double a = 2.0 * M_PI * static_cast<double>(i) /
                                     static_cast<double>(tr_points);
                    ring.push_back({radius * std::cos(a), radius * std::sin(a)});
                }
                ridge::emit(ring, tr_out);
            }
        } else if (ev->parsed()) {
            const ridge::ResultsTable table = ridge::read_results(ev_results);
            ridge::PointCloud est;
            est.d = table.d;
            for (const ridge::RidgeResult& r : table.rows)
                if (r.converged) est.push_back(r.point);
            if (est.n == 0)
                throw ridge::input_error("evaluate: no converged points in " + ev_results);
            const ridge::PointCloud oracle = ridge::ingest(ev_oracle);
            std::cout << ridge::format_g17(ridge::hausdorff(est, oracle)) << "\n";
        } else if (pl->parsed()) {
            const ridge::ResultsTable table = ridge::read_results(pl_results);
            const ridge::PointCloud cloud = ridge::ingest(pl_data);
            ridge::write_plot_svg(cloud, table, pl_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
