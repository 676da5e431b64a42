#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stadlab/common.hpp"

namespace stadlab {

using Json = nlohmann::json;

/// Tabular artifact with pre-formatted cells. Numbers go through
/// csv_number (12 significant digits) so reruns of a deterministic
/// computation produce byte-identical files.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::string csv_number(double v) { return format_g12(v); }

inline std::string csv_int(long long v) { return std::to_string(v); }

inline std::string csv_to_string(const CsvTable& table) {
    std::ostringstream out;
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw Error("csv_to_string: row width differs from header");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << row[i];
        out << '\n';
    }
    return out.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw Error("failed writing " + path.string());
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    write_text_file(path, csv_to_string(table));
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Minimal SVG plotting: enough for the diagnostic figures (log-log norm
// curves, spectrum scatter, energy traces) without external tooling.

struct PlotSeries {
    std::vector<double> xs;
    std::vector<double> ys;
    std::string color = "#1f77b4";
    bool line = true;
    bool markers = false;
    std::string label;
};

struct PlotSpec {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool logx = false;
    bool logy = false;
    std::vector<PlotSeries> series;
    std::vector<double> hlines;  ///< dashed horizontal guides (data units)
    int width = 720;
    int height = 480;
};

namespace detail {

inline std::string svg_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace detail

/// Render a plot to SVG. Points with nonpositive coordinates on a log axis
/// are dropped; an empty drawable set still yields a valid (annotated) file.
inline std::string render_svg_plot(const PlotSpec& spec) {
    const double ml = 70, mr = 20, mt = 40, mb = 55;
    const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;

    auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.logy ? std::log10(v) : v; };

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    auto usable = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return false;
        if (spec.logx && !(x > 0)) return false;
        if (spec.logy && !(y > 0)) return false;
        return true;
    };
    for (const auto& s : spec.series)
        for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
            if (!usable(s.xs[i], s.ys[i])) continue;
            const double x = tx(s.xs[i]), y = ty(s.ys[i]);
            if (!any) {
                xmin = xmax = x;
                ymin = ymax = y;
                any = true;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    for (double h : spec.hlines) {
        if (spec.logy && !(h > 0)) continue;
        const double y = ty(h);
        if (!any) continue;
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
    if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }
    const double xpad = 0.04 * (xmax - xmin), ypad = 0.06 * (ymax - ymin);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

    auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double v) { return mt + (ymax - ty(v)) / (ymax - ymin) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
        << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width
        << " " << spec.height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Frame and ticks (5 per axis in transformed coordinates).
    svg << "<rect x=\"" << detail::svg_coord(ml) << "\" y=\""
        << detail::svg_coord(mt) << "\" width=\"" << detail::svg_coord(pw)
        << "\" height=\"" << detail::svg_coord(ph)
        << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        const double gx = ml + pw * i / 4.0;
        const double gy = mt + ph - ph * i / 4.0;
        const double vx = spec.logx ? std::pow(10.0, fx) : fx;
        const double vy = spec.logy ? std::pow(10.0, fy) : fy;
        svg << "<line x1=\"" << detail::svg_coord(gx) << "\" y1=\""
            << detail::svg_coord(mt + ph) << "\" x2=\"" << detail::svg_coord(gx)
            << "\" y2=\"" << detail::svg_coord(mt + ph + 5)
            << "\" stroke=\"#333\"/>\n"
            << "<text x=\"" << detail::svg_coord(gx) << "\" y=\""
            << detail::svg_coord(mt + ph + 18)
            << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\">"
            << detail::tick_label(vx) << "</text>\n";
        svg << "<line x1=\"" << detail::svg_coord(ml - 5) << "\" y1=\""
            << detail::svg_coord(gy) << "\" x2=\"" << detail::svg_coord(ml)
            << "\" y2=\"" << detail::svg_coord(gy) << "\" stroke=\"#333\"/>\n"
            << "<text x=\"" << detail::svg_coord(ml - 8) << "\" y=\""
            << detail::svg_coord(gy + 4)
            << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333\">"
            << detail::tick_label(vy) << "</text>\n";
    }

    for (double h : spec.hlines) {
        if (spec.logy && !(h > 0)) continue;
        const double gy = py(h);
        if (gy < mt - 1 || gy > mt + ph + 1) continue;
        svg << "<line x1=\"" << detail::svg_coord(ml) << "\" y1=\""
            << detail::svg_coord(gy) << "\" x2=\"" << detail::svg_coord(ml + pw)
            << "\" y2=\"" << detail::svg_coord(gy)
            << "\" stroke=\"#888\" stroke-dasharray=\"6,4\"/>\n";
    }

    int legend_row = 0;
    for (const auto& s : spec.series) {
        std::ostringstream pts;
        bool started = false;
        for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
            if (!usable(s.xs[i], s.ys[i])) continue;
            pts << (started ? " " : "") << detail::svg_coord(px(s.xs[i])) << ","
                << detail::svg_coord(py(s.ys[i]));
            started = true;
            if (s.markers)
                svg << "<circle cx=\"" << detail::svg_coord(px(s.xs[i]))
                    << "\" cy=\"" << detail::svg_coord(py(s.ys[i]))
                    << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
        }
        if (s.line && started)
            svg << "<polyline points=\"" << pts.str()
                << "\" fill=\"none\" stroke=\"" << s.color
                << "\" stroke-width=\"1.5\"/>\n";
        if (!s.label.empty()) {
            const double lx = ml + pw - 150, ly = mt + 16 + 16 * legend_row++;
            svg << "<line x1=\"" << detail::svg_coord(lx) << "\" y1=\""
                << detail::svg_coord(ly - 4) << "\" x2=\""
                << detail::svg_coord(lx + 24) << "\" y2=\""
                << detail::svg_coord(ly - 4) << "\" stroke=\"" << s.color
                << "\" stroke-width=\"2\"/>\n"
                << "<text x=\"" << detail::svg_coord(lx + 30) << "\" y=\""
                << detail::svg_coord(ly)
                << "\" font-size=\"12\" fill=\"#333\">"
                << detail::svg_escape(s.label) << "</text>\n";
        }
    }

    svg << "<text x=\"" << detail::svg_coord(ml + pw / 2) << "\" y=\"22\" "
        << "font-size=\"14\" text-anchor=\"middle\" fill=\"#111\">"
        << detail::svg_escape(spec.title) << "</text>\n"
        << "<text x=\"" << detail::svg_coord(ml + pw / 2) << "\" y=\""
        << detail::svg_coord(mt + ph + 40)
        << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333\">"
        << detail::svg_escape(spec.xlabel) << "</text>\n"
        << "<text x=\"16\" y=\"" << detail::svg_coord(mt + ph / 2)
        << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333\" "
        << "transform=\"rotate(-90 16 " << detail::svg_coord(mt + ph / 2)
        << ")\">" << detail::svg_escape(spec.ylabel) << "</text>\n</svg>\n";
    return svg.str();
}

inline void write_svg_plot(const std::filesystem::path& path,
                           const PlotSpec& spec) {
    write_text_file(path, render_svg_plot(spec));
}

}  // namespace stadlab
