#pragma once

#include "hyprelax/config.hpp"
#include "hyprelax/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace hyprelax {

/// Emit a configuration as '# '-prefixed header lines (LF endings), so every
/// CSV carries the resolved run configuration it came from.
inline std::string config_header(const RunConfiguration& cfg) {
    std::istringstream in(cfg.emit());
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) out << "# " << line << "\n";
    return out.str();
}

/// Recover the embedded configuration from '# ' header lines.
inline RunConfiguration config_from_header(std::istream& in) {
    std::ostringstream body;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0)
            body << line.substr(2) << "\n";
        else if (line == "#")
            body << "\n";
        else
            break;
    }
    return RunConfiguration::parse_string(body.str());
}

/// Deterministic CSV: 17 significant digits, '.' decimal separator, LF line
/// endings, one header row of column names.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void set_header(const RunConfiguration& cfg) { header_ = config_header(cfg); }

    void add_row(const std::vector<double>& values) {
        if (values.size() != columns_.size())
            throw std::invalid_argument("csv: row width mismatch");
        std::string row;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) row += ",";
            row += format_double(values[i]);
        }
        rows_.push_back(std::move(row));
    }

    void add_text_row(const std::vector<std::string>& values) {
        if (values.size() != columns_.size())
            throw std::invalid_argument("csv: row width mismatch");
        std::string row;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) row += ",";
            row += values[i];
        }
        rows_.push_back(std::move(row));
    }

    std::string str() const {
        std::string out = header_;
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) out += ",";
            out += columns_[i];
        }
        out += "\n";
        for (const auto& r : rows_) {
            out += r;
            out += "\n";
        }
        return out;
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
        if (!out) throw ConfigError("csv: cannot open '" + path + "' for writing");
        out << str();
    }

private:
    std::vector<std::string> columns_;
    std::string header_;
    std::vector<std::string> rows_;
};

// ---------------------------------------------------------------------------
// dependency-free SVG line plots

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

struct PlotStyle {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool log_x = false;
    bool log_y = false;
    int width = 760;
    int height = 540;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::vector<double> axis_ticks(double lo, double hi, bool log_scale) {
    std::vector<double> ticks;
    if (log_scale) {
        const int e0 = static_cast<int>(std::ceil(std::log10(lo) - 1e-12));
        const int e1 = static_cast<int>(std::floor(std::log10(hi) + 1e-12));
        for (int e = e0; e <= e1; ++e) ticks.push_back(std::pow(10.0, e));
        if (ticks.empty()) ticks = {lo, hi};
    } else {
        const double span = hi - lo;
        const double raw = span / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double candidate : {1.0, 2.0, 5.0, 10.0})
            if (mag * candidate >= raw) {
                step = mag * candidate;
                break;
            }
        for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step)
            ticks.push_back(t);
    }
    return ticks;
}

} // namespace detail

/// Standalone SVG with axes, optional log scales, and a legend.
/// Byte-deterministic for identical input.
inline std::string emit_svg(const std::vector<PlotSeries>& series, const PlotStyle& style) {
    if (series.empty()) throw std::invalid_argument("svg: no series");
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        if (s.points.empty()) throw std::invalid_argument("svg: empty series '" + s.label + "'");
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y))
                throw std::invalid_argument("svg: non-finite point in series '" + s.label + "'");
            if (style.log_x && x <= 0.0)
                throw std::invalid_argument("svg: log x-axis needs positive values");
            if (style.log_y && y <= 0.0)
                throw std::invalid_argument("svg: log y-axis needs positive values");
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmin == xmax) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymin == ymax) {
        ymin = style.log_y ? ymin * 0.5 : ymin - 0.5;
        ymax = style.log_y ? ymax * 2.0 : ymax + 0.5;
    }

    const double ml = 70, mr = 20, mt = 40, mb = 55;
    const double pw = style.width - ml - mr, ph = style.height - mt - mb;
    auto tx = [&](double x) {
        const double u = style.log_x ? (std::log10(x) - std::log10(xmin)) /
                                           (std::log10(xmax) - std::log10(xmin))
                                     : (x - xmin) / (xmax - xmin);
        return ml + u * pw;
    };
    auto ty = [&](double y) {
        const double u = style.log_y ? (std::log10(y) - std::log10(ymin)) /
                                           (std::log10(ymax) - std::log10(ymin))
                                     : (y - ymin) / (ymax - ymin);
        return mt + (1.0 - u) * ph;
    };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\""
        << style.height << "\" viewBox=\"0 0 " << style.width << " " << style.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << style.width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << style.title << "</text>\n";

    for (double t : detail::axis_ticks(xmin, xmax, style.log_x)) {
        if (t < xmin || t > xmax) continue;
        const double px = tx(t);
        out << "<line x1=\"" << detail::svg_num(px) << "\" y1=\"" << detail::svg_num(mt)
            << "\" x2=\"" << detail::svg_num(px) << "\" y2=\"" << detail::svg_num(mt + ph)
            << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << detail::svg_num(px) << "\" y=\"" << detail::svg_num(mt + ph + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_double(t) << "</text>\n";
    }
    for (double t : detail::axis_ticks(ymin, ymax, style.log_y)) {
        if (t < ymin || t > ymax) continue;
        const double py = ty(t);
        out << "<line x1=\"" << detail::svg_num(ml) << "\" y1=\"" << detail::svg_num(py)
            << "\" x2=\"" << detail::svg_num(ml + pw) << "\" y2=\"" << detail::svg_num(py)
            << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << detail::svg_num(ml - 6) << "\" y=\"" << detail::svg_num(py + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_double(t) << "</text>\n";
    }
    out << "<rect x=\"" << detail::svg_num(ml) << "\" y=\"" << detail::svg_num(mt) << "\" width=\""
        << detail::svg_num(pw) << "\" height=\"" << detail::svg_num(ph)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << style.width / 2 << "\" y=\"" << style.height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << style.xlabel
        << "</text>\n";
    out << "<text x=\"18\" y=\"" << style.height / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << style.height / 2 << ")\">" << style.ylabel
        << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        out << "<polyline fill=\"none\" stroke=\"" << palette[i % 8]
            << "\" stroke-width=\"1.8\" points=\"";
        for (const auto& [x, y] : series[i].points)
            out << detail::svg_num(tx(x)) << "," << detail::svg_num(ty(y)) << " ";
        out << "\"/>\n";
        const double ly = mt + 16 + 18 * static_cast<double>(i);
        out << "<line x1=\"" << detail::svg_num(ml + pw - 150) << "\" y1=\"" << detail::svg_num(ly)
            << "\" x2=\"" << detail::svg_num(ml + pw - 126) << "\" y2=\"" << detail::svg_num(ly)
            << "\" stroke=\"" << palette[i % 8] << "\" stroke-width=\"1.8\"/>\n";
        out << "<text x=\"" << detail::svg_num(ml + pw - 120) << "\" y=\"" << detail::svg_num(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[i].label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

inline void write_svg_file(const std::string& path, const std::vector<PlotSeries>& series,
                           const PlotStyle& style) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("svg: cannot open '" + path + "' for writing");
    out << emit_svg(series, style);
}

} // namespace hyprelax
