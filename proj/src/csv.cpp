#include "ridge/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ridge/errors.hpp"

namespace ridge {

namespace {

std::vector<std::string> split_row(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string strip(std::string s)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
    return s.substr(b);
}

double parse_double(const std::string& cell, const std::string& path, std::size_t line_no)
{
    const std::string t = strip(cell);
    if (t.empty())
        throw input_error(path + ":" + std::to_string(line_no) + ": empty numeric cell");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
        throw input_error(path + ":" + std::to_string(line_no) + ": malformed number '" +
                          t + "'");
    return v;
}

} // namespace

ColumnFilter parse_filter(const std::string& spec)
{
    const std::size_t second = spec.rfind(':');
    const std::size_t first = second == std::string::npos ? std::string::npos
                                                          : spec.rfind(':', second - 1);
    if (first == std::string::npos || second == std::string::npos || first == 0 ||
        second <= first + 1 || second + 1 > spec.size())
        throw input_error("filter '" + spec + "' is not of the form col:lo:hi");
    ColumnFilter f;
    f.column = spec.substr(0, first);
    try {
        f.lo = std::stod(spec.substr(first + 1, second - first - 1));
        f.hi = std::stod(spec.substr(second + 1));
    } catch (const std::exception&) {
        throw input_error("filter '" + spec + "' has non-numeric bounds");
    }
    if (f.lo > f.hi)
        throw input_error("filter '" + spec + "' has lo > hi");
    return f;
}

PointCloud ingest(const std::string& path, const std::vector<ColumnFilter>& filters)
{
    std::ifstream in(path);
    if (!in) throw input_error("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw input_error(path + ": empty file");
    std::vector<std::string> labels;
    for (const std::string& cell : split_row(line)) labels.push_back(strip(cell));
    const std::size_t d = labels.size();
    if (d == 0) throw input_error(path + ": empty header");

    // Resolve filters to column indices: names first, then 0-based indices.
    std::vector<std::pair<std::size_t, const ColumnFilter*>> resolved;
    for (const ColumnFilter& f : filters) {
        std::size_t idx = d;
        for (std::size_t k = 0; k < d; ++k)
            if (labels[k] == f.column) idx = k;
        if (idx == d) {
            try {
                std::size_t pos = 0;
                const long v = std::stol(f.column, &pos);
                if (pos == f.column.size() && v >= 0 && static_cast<std::size_t>(v) < d)
                    idx = static_cast<std::size_t>(v);
            } catch (const std::exception&) {
            }
        }
        if (idx == d)
            throw input_error(path + ": filter column '" + f.column + "' not found");
        resolved.emplace_back(idx, &f);
    }

    PointCloud cloud;
    cloud.d = d;
    cloud.labels = labels;
    std::size_t line_no = 1;
    Vec row(d);
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        std::vector<std::string> cells = split_row(line);
        if (cells.size() != d)
            throw input_error(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(d) + " columns, found " +
                              std::to_string(cells.size()));
        for (std::size_t k = 0; k < d; ++k) row[k] = parse_double(cells[k], path, line_no);
        bool keep = true;
        for (const auto& [idx, f] : resolved)
            if (row[idx] < f->lo || row[idx] > f->hi) keep = false;
        if (keep) cloud.push_back(row);
    }
    if (cloud.n == 0)
        throw input_error(path + ": zero rows after filtering");
    return cloud;
}

std::string format_g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit(const PointCloud& cloud, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw input_error("cannot write '" + path + "'");
    for (std::size_t k = 0; k < cloud.d; ++k) {
        if (k) out << ',';
        out << (k < cloud.labels.size() ? cloud.labels[k] : "x" + std::to_string(k + 1));
    }
    out << '\n';
    for (std::size_t i = 0; i < cloud.n; ++i) {
        const double* p = cloud.point(i);
        for (std::size_t k = 0; k < cloud.d; ++k) {
            if (k) out << ',';
            out << format_g17(p[k]);
        }
        out << '\n';
    }
    if (!out) throw error("write failed for '" + path + "'");
}

void write_results(const std::vector<RidgeResult>& results, std::size_t d,
                   const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw input_error("cannot write '" + path + "'");
    for (std::size_t k = 1; k <= d; ++k) out << "start_" << k << ',';
    for (std::size_t k = 1; k <= d; ++k) out << "point_" << k << ',';
    out << "iterations,converged,";
    for (std::size_t k = 1; k <= d; ++k) out << "int_lo_" << k << ',';
    for (std::size_t k = 1; k <= d; ++k) out << "int_hi_" << k << ',';
    out << "flat_top\n";

    for (const RidgeResult& r : results) {
        for (std::size_t k = 0; k < d; ++k) out << format_g17(r.start[k]) << ',';
        for (std::size_t k = 0; k < d; ++k) out << format_g17(r.point[k]) << ',';
        out << r.iterations << ',' << (r.converged ? 1 : 0) << ',';
        for (std::size_t k = 0; k < d; ++k) {
            if (r.has_interval) out << format_g17(r.interval_lo[k]);
            out << ',';
        }
        for (std::size_t k = 0; k < d; ++k) {
            if (r.has_interval) out << format_g17(r.interval_hi[k]);
            out << ',';
        }
        out << (r.flat_top ? 1 : 0) << '\n';
    }
    if (!out) throw error("write failed for '" + path + "'");
}

ResultsTable read_results(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw input_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw input_error(path + ": empty file");
    const std::vector<std::string> header = split_row(line);

    std::size_t d = 0;
    while (d < header.size() && strip(header[d]) == "start_" + std::to_string(d + 1)) ++d;
    if (d == 0 || header.size() != 4 * d + 3)
        throw input_error(path + ": not a results file (unrecognized header)");

    ResultsTable table;
    table.d = d;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        const std::vector<std::string> cells = split_row(line);
        if (cells.size() != header.size())
            throw input_error(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " columns, found " +
                              std::to_string(cells.size()));
        RidgeResult r;
        std::size_t c = 0;
        r.start.resize(d);
        r.point.resize(d);
        for (std::size_t k = 0; k < d; ++k) r.start[k] = parse_double(cells[c++], path, line_no);
        for (std::size_t k = 0; k < d; ++k) r.point[k] = parse_double(cells[c++], path, line_no);
        r.iterations = static_cast<std::size_t>(parse_double(cells[c++], path, line_no));
        r.converged = parse_double(cells[c++], path, line_no) != 0.0;
        bool any_interval = false;
        for (std::size_t k = 0; k < 2 * d; ++k)
            if (!strip(cells[c + k]).empty()) any_interval = true;
        if (any_interval) {
            r.has_interval = true;
            r.interval_lo.resize(d);
            r.interval_hi.resize(d);
            for (std::size_t k = 0; k < d; ++k)
                r.interval_lo[k] = parse_double(cells[c + k], path, line_no);
            for (std::size_t k = 0; k < d; ++k)
                r.interval_hi[k] = parse_double(cells[c + d + k], path, line_no);
        }
        c += 2 * d;
        r.flat_top = parse_double(cells[c++], path, line_no) != 0.0;
        table.rows.push_back(std::move(r));
    }
    return table;
}

void write_traces(const std::vector<RidgeResult>& results, std::size_t d,
                  const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw input_error("cannot write '" + path + "'");
    out << "start_index,iteration";
    for (std::size_t k = 1; k <= d; ++k) out << ",x_" << k;
    out << '\n';
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& tr = results[i].trace;
        for (std::size_t t = 0; t < tr.size(); ++t) {
            out << i << ',' << t;
            for (std::size_t k = 0; k < d; ++k) out << ',' << format_g17(tr[t][k]);
            out << '\n';
        }
    }
    if (!out) throw error("write failed for '" + path + "'");
}

} // namespace ridge
