#include "ridge/svg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ridge/errors.hpp"

namespace ridge {

namespace {

constexpr double kCanvas = 800.0;
constexpr double kMargin = 60.0;

std::string fmt2(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt6(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Largest 1/2/5 * 10^k step giving at most eight intervals over `span`.
double tick_step(double span)
{
    if (!(span > 0.0)) return 1.0;
    const double raw = span / 8.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (mag * m >= raw) return mag * m;
    return 10.0 * mag;
}

} // namespace

void write_plot_svg(const PointCloud& data, const ResultsTable& results,
                    const std::string& path)
{
    if (data.d < 2)
        throw input_error("plot: data must have at least two coordinates");

    double xlo = kInfinity, xhi = -kInfinity, ylo = kInfinity, yhi = -kInfinity;
    auto grow = [&](double x, double y) {
        xlo = std::min(xlo, x);
        xhi = std::max(xhi, x);
        ylo = std::min(ylo, y);
        yhi = std::max(yhi, y);
    };
    for (std::size_t i = 0; i < data.n; ++i) grow(data.point(i)[0], data.point(i)[1]);
    for (const RidgeResult& r : results.rows) {
        if (!r.converged) continue;
        grow(r.point[0], r.point[1]);
        if (r.has_interval) {
            grow(r.interval_lo[0], r.interval_lo[1]);
            grow(r.interval_hi[0], r.interval_hi[1]);
        }
    }
    if (!(xhi > xlo)) xhi = xlo + 1.0;
    if (!(yhi > ylo)) yhi = ylo + 1.0;

    // Equal aspect: one scale for both axes, centered panel.
    const double panel = kCanvas - 2.0 * kMargin;
    const double scale = panel / std::max(xhi - xlo, yhi - ylo);
    const double xoff = kMargin + 0.5 * (panel - scale * (xhi - xlo));
    const double yoff = kMargin + 0.5 * (panel - scale * (yhi - ylo));
    auto px = [&](double x) { return xoff + scale * (x - xlo); };
    auto py = [&](double y) { return kCanvas - (yoff + scale * (y - ylo)); };

    std::ofstream out(path);
    if (!out) throw input_error("cannot write '" + path + "'");
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kCanvas
        << "\" height=\"" << kCanvas << "\" viewBox=\"0 0 " << kCanvas << ' ' << kCanvas
        << "\">\n"
        << "<rect width=\"" << kCanvas << "\" height=\"" << kCanvas
        << "\" fill=\"white\"/>\n";

    // Axes with ticks.
    const double ax0 = px(xlo), ax1 = px(xhi), ay0 = py(ylo), ay1 = py(yhi);
    out << "<g stroke=\"#404040\" stroke-width=\"1\" fill=\"none\">\n"
        << "<path d=\"M" << fmt2(ax0) << ' ' << fmt2(ay0) << " L" << fmt2(ax1) << ' '
        << fmt2(ay0) << "\"/>\n"
        << "<path d=\"M" << fmt2(ax0) << ' ' << fmt2(ay0) << " L" << fmt2(ax0) << ' '
        << fmt2(ay1) << "\"/>\n</g>\n"
        << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#404040\">\n";
    const double sx = tick_step(xhi - xlo);
    for (double t = std::ceil(xlo / sx) * sx; t <= xhi + 1e-9 * sx; t += sx) {
        out << "<line x1=\"" << fmt2(px(t)) << "\" y1=\"" << fmt2(ay0) << "\" x2=\""
            << fmt2(px(t)) << "\" y2=\"" << fmt2(ay0 + 5) << "\" stroke=\"#404040\"/>\n"
            << "<text x=\"" << fmt2(px(t)) << "\" y=\"" << fmt2(ay0 + 18)
            << "\" text-anchor=\"middle\">" << fmt6(t) << "</text>\n";
    }
    const double sy = tick_step(yhi - ylo);
    for (double t = std::ceil(ylo / sy) * sy; t <= yhi + 1e-9 * sy; t += sy) {
        out << "<line x1=\"" << fmt2(ax0 - 5) << "\" y1=\"" << fmt2(py(t)) << "\" x2=\""
            << fmt2(ax0) << "\" y2=\"" << fmt2(py(t)) << "\" stroke=\"#404040\"/>\n"
            << "<text x=\"" << fmt2(ax0 - 8) << "\" y=\"" << fmt2(py(t) + 4)
            << "\" text-anchor=\"end\">" << fmt6(t) << "</text>\n";
    }
    if (data.labels.size() >= 2) {
        out << "<text x=\"" << fmt2(0.5 * kCanvas) << "\" y=\"" << fmt2(kCanvas - 15)
            << "\" text-anchor=\"middle\">" << data.labels[0] << "</text>\n"
            << "<text x=\"15\" y=\"" << fmt2(0.5 * kCanvas)
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
            << fmt2(0.5 * kCanvas) << ")\">" << data.labels[1] << "</text>\n";
    }
    out << "</g>\n";

    // Data layer.
    out << "<g fill=\"#c8c8c8\">\n";
    for (std::size_t i = 0; i < data.n; ++i)
        out << "<circle cx=\"" << fmt2(px(data.point(i)[0])) << "\" cy=\""
            << fmt2(py(data.point(i)[1])) << "\" r=\"2\"/>\n";
    out << "</g>\n";

    // Interval segments under the ridge markers.
    out << "<g stroke=\"#d62728\" stroke-width=\"1.2\">\n";
    for (const RidgeResult& r : results.rows) {
        if (!r.converged || !r.has_interval) continue;
        out << "<line x1=\"" << fmt2(px(r.interval_lo[0])) << "\" y1=\""
            << fmt2(py(r.interval_lo[1])) << "\" x2=\"" << fmt2(px(r.interval_hi[0]))
            << "\" y2=\"" << fmt2(py(r.interval_hi[1])) << "\"/>\n";
    }
    out << "</g>\n";

    // Ridge points.
    out << "<g fill=\"#202020\">\n";
    for (const RidgeResult& r : results.rows) {
        if (!r.converged) continue;
        out << "<circle cx=\"" << fmt2(px(r.point[0])) << "\" cy=\""
            << fmt2(py(r.point[1])) << "\" r=\"2.5\"/>\n";
    }
    out << "</g>\n</svg>\n";
    if (!out) throw error("write failed for '" + path + "'");
}

} // namespace ridge
