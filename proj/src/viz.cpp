#include "rnmt/viz.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rnmt {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

void export_heatmap(const GateHeatmap& heatmap, const std::string& path,
                    HeatmapFormat format) {
    const Mat<double>& v = heatmap.values;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open heatmap output: " + path);

    if (format == HeatmapFormat::Csv) {
        out << "token";
        for (const auto& label : heatmap.col_labels) out << ',' << label;
        out << '\n';
        char buf[32];
        for (Index r = 0; r < v.rows(); ++r) {
            out << heatmap.row_labels[static_cast<std::size_t>(r)];
            for (Index c = 0; c < v.cols(); ++c) {
                std::snprintf(buf, sizeof(buf), "%.6f", v(r, c));
                out << ',' << buf;
            }
            out << '\n';
        }
    } else {
        out << "P2\n" << v.cols() << ' ' << v.rows() << "\n255\n";
        for (Index r = 0; r < v.rows(); ++r) {
            for (Index c = 0; c < v.cols(); ++c) {
                if (c) out << ' ';
                out << std::lround(v(r, c) * 255.0);
            }
            out << '\n';
        }
    }
    if (!out) throw IoError("heatmap write failed: " + path);
}

GateHeatmap parse_heatmap_csv(const std::string& path) {
    auto lines = read_lines(path);
    if (lines.empty()) throw FormatError("empty heatmap csv: " + path);

    GateHeatmap hm;
    auto header = split_csv(lines[0]);
    if (header.empty() || header[0] != "token") {
        throw FormatError("heatmap csv missing token header: " + path);
    }
    hm.col_labels.assign(header.begin() + 1, header.end());

    const std::size_t rows = lines.size() - 1;
    const std::size_t cols = hm.col_labels.size();
    hm.values.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        auto cells = split_csv(lines[r + 1]);
        if (cells.size() != cols + 1) {
            throw FormatError("heatmap csv row width mismatch at line " +
                              std::to_string(r + 2));
        }
        hm.row_labels.push_back(cells[0]);
        for (std::size_t c = 0; c < cols; ++c) {
            hm.values(static_cast<Index>(r), static_cast<Index>(c)) =
                std::stod(cells[c + 1]);
        }
    }
    return hm;
}

double heatmap_correlation(const GateHeatmap& a, const GateHeatmap& b) {
    if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols()) {
        throw ShapeError("heatmap_correlation: shape mismatch");
    }
    const auto x = a.values.reshaped().array();
    const auto y = b.values.reshaped().array();
    const double mx = x.mean();
    const double my = y.mean();
    const double cov = ((x - mx) * (y - my)).sum();
    const double vx = ((x - mx) * (x - mx)).sum();
    const double vy = ((y - my) * (y - my)).sum();
    if (vx == 0.0 || vy == 0.0) return 0.0;
    return cov / std::sqrt(vx * vy);
}

}  // namespace rnmt
