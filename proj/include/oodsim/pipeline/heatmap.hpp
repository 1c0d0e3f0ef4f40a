#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "oodsim/correlation/analysis.hpp"
#include "oodsim/error.hpp"
#include "oodsim/text_io.hpp"

namespace oodsim {

struct Rgb {
    int r = 0, g = 0, b = 0;
};

/// Linear shade for a coefficient in [-1, 1]: -1 is lightest, +1 darkest.
inline Rgb heatmap_shade(double coefficient) {
    constexpr Rgb light{247, 251, 255};
    constexpr Rgb dark{8, 48, 107};
    const double t = std::clamp((coefficient + 1.0) / 2.0, 0.0, 1.0);
    auto mix = [t](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
    return {mix(light.r, dark.r), mix(light.g, dark.g), mix(light.b, dark.b)};
}

inline std::string hex_color(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

inline std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v == 0.0 ? 0.0 : v);
    return buf;
}

struct HeatmapGrid {
    std::vector<std::string> rows;
    std::vector<Metric> cols;
    std::vector<const CorrelationEntry*> cells; // row-major, may hold nullptr
};

inline HeatmapGrid heatmap_grid(const CorrelationReport& report, CorrelationMethod method) {
    std::set<std::string> rows;
    std::set<Metric> cols;
    for (const auto& e : report.entries)
        if (e.method == method) {
            rows.insert(e.train);
            cols.insert(e.metric);
        }
    if (rows.empty()) throw DataError("heatmap: report has no " + std::string(to_string(method)) + " entries");
    HeatmapGrid g{{rows.begin(), rows.end()}, {cols.begin(), cols.end()}, {}};
    for (const auto& r : g.rows)
        for (auto m : g.cols) g.cells.push_back(report.find(r, m, method));
    return g;
}

} // namespace detail

inline std::string heatmap_svg(const CorrelationReport& report, CorrelationMethod method) {
    const auto g = detail::heatmap_grid(report, method);
    constexpr int cell_w = 90, cell_h = 36, left = 120, top = 70, legend_h = 110;
    const int width = left + cell_w * static_cast<int>(g.cols.size()) + 40;
    const int height = top + cell_h * static_cast<int>(g.rows.size()) + legend_h;
    const std::string method_name = method == CorrelationMethod::KendallTau ? "Kendall tau"
                                    : method == CorrelationMethod::Pearson  ? "Pearson"
                                                                            : "Spearman";
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"13\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    s += "<text x=\"" + std::to_string(left) + "\" y=\"24\" font-size=\"15\" font-weight=\"bold\">" +
         detail::xml_escape(method_name) + " correlation: performance vs similarity</text>\n";
    for (std::size_t c = 0; c < g.cols.size(); ++c) {
        const int x = left + static_cast<int>(c) * cell_w + cell_w / 2;
        s += "<text x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(top - 10) + "\" text-anchor=\"middle\">" +
             std::string(to_string(g.cols[c])) + "</text>\n";
    }
    for (std::size_t r = 0; r < g.rows.size(); ++r) {
        const int y = top + static_cast<int>(r) * cell_h;
        s += "<text x=\"" + std::to_string(left - 8) + "\" y=\"" + std::to_string(y + cell_h / 2 + 5) +
             "\" text-anchor=\"end\">" + detail::xml_escape(g.rows[r]) + "</text>\n";
        for (std::size_t c = 0; c < g.cols.size(); ++c) {
            const auto* e = g.cells[r * g.cols.size() + c];
            const int x = left + static_cast<int>(c) * cell_w;
            const bool defined = e && e->coefficient;
            const auto fill = defined ? hex_color(heatmap_shade(*e->coefficient)) : std::string("#d9d9d9");
            const bool dark = defined && (*e->coefficient + 1.0) / 2.0 > 0.55;
            s += "<rect class=\"cell\" x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
                 std::to_string(cell_w) + "\" height=\"" + std::to_string(cell_h) + "\" fill=\"" + fill +
                 "\" stroke=\"#ffffff\"/>\n";
            s += "<text x=\"" + std::to_string(x + cell_w / 2) + "\" y=\"" + std::to_string(y + cell_h / 2 + 5) +
                 "\" text-anchor=\"middle\" fill=\"" + (dark ? "#ffffff" : "#000000") + "\">" +
                 (defined ? detail::fixed2(*e->coefficient) : std::string("n/a")) + "</text>\n";
        }
    }
    // legend: gradient bar from -1 to +1 and the orientation note
    const int ly = top + cell_h * static_cast<int>(g.rows.size()) + 20;
    s += "<defs><linearGradient id=\"scale\" x1=\"0\" x2=\"1\" y1=\"0\" y2=\"0\">"
         "<stop offset=\"0\" stop-color=\"" + hex_color(heatmap_shade(-1.0)) + "\"/>"
         "<stop offset=\"1\" stop-color=\"" + hex_color(heatmap_shade(1.0)) + "\"/></linearGradient></defs>\n";
    s += "<rect x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(ly) +
         "\" width=\"200\" height=\"12\" fill=\"url(#scale)\" stroke=\"#999999\"/>\n";
    s += "<text x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(ly + 28) + "\">-1</text>\n";
    s += "<text x=\"" + std::to_string(left + 200) + "\" y=\"" + std::to_string(ly + 28) +
         "\" text-anchor=\"end\">+1</text>\n";
    s += "<text x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(ly + 50) +
         "\" font-size=\"11\">Shade shows the raw coefficient. Cosine, Mauve (similarities): darker is better.</text>\n";
    s += "<text x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(ly + 66) +
         "\" font-size=\"11\">Wstn, JSD (distances): lighter is better.</text>\n";
    s += "</svg>\n";
    return s;
}

inline std::string heatmap_csv(const CorrelationReport& report, CorrelationMethod method) {
    const auto g = detail::heatmap_grid(report, method);
    std::vector<std::string> header{"train"};
    for (auto m : g.cols) header.emplace_back(to_string(m));
    std::string out;
    append_csv_row(out, header);
    for (std::size_t r = 0; r < g.rows.size(); ++r) {
        std::vector<std::string> row{g.rows[r]};
        for (std::size_t c = 0; c < g.cols.size(); ++c) {
            const auto* e = g.cells[r * g.cols.size() + c];
            row.push_back(e && e->coefficient ? format_double(*e->coefficient) : std::string());
        }
        append_csv_row(out, row);
    }
    return out;
}

/// Writes the SVG heatmap to svg_path and the plain matrix next to it (.csv).
inline void emit_heatmap(const CorrelationReport& report, CorrelationMethod method, const std::filesystem::path& svg_path) {
    const auto svg = heatmap_svg(report, method);
    const auto csv = heatmap_csv(report, method);
    write_file(svg_path, svg);
    auto csv_path = svg_path;
    csv_path.replace_extension(".csv");
    write_file(csv_path, csv);
}

} // namespace oodsim
