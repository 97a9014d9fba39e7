#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "aed/io.hpp"

namespace aed {

/// Minimal multi-series SVG line chart. Enough for the report plots; no
/// external dependencies, deterministic output.
class SvgLinePlot {
public:
    SvgLinePlot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    void add_series(std::string name, std::vector<double> x, std::vector<double> y, std::string color) {
        series_.push_back({std::move(name), std::move(x), std::move(y), std::move(color)});
    }

    void set_x_log(bool v) { x_log_ = v; }

    void write(const std::filesystem::path& path) const {
        const double w = 640, h = 420;
        const double ml = 64, mr = 16, mt = 36, mb = 48;
        double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
        bool first = true;
        for (const auto& s : series_) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                const double xv = x_log_ ? std::log10(std::max(s.x[i], 1e-12)) : s.x[i];
                if (first) {
                    x_min = x_max = xv;
                    y_min = y_max = s.y[i];
                    first = false;
                } else {
                    x_min = std::min(x_min, xv);
                    x_max = std::max(x_max, xv);
                    y_min = std::min(y_min, s.y[i]);
                    y_max = std::max(y_max, s.y[i]);
                }
            }
        }
        if (x_max <= x_min) x_max = x_min + 1.0;
        if (y_max <= y_min) y_max = y_min + 1.0;
        const double y_pad = 0.05 * (y_max - y_min);
        y_min -= y_pad;
        y_max += y_pad;

        auto sx = [&](double x) {
            const double v = x_log_ ? std::log10(std::max(x, 1e-12)) : x;
            return ml + (v - x_min) / (x_max - x_min) * (w - ml - mr);
        };
        auto sy = [&](double y) { return h - mb - (y - y_min) / (y_max - y_min) * (h - mt - mb); };

        auto os = open_out(path);
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title_
           << "</text>\n";
        // axes
        os << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
           << "\" stroke=\"black\"/>\n";
        os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
           << "\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double fx = x_min + (x_max - x_min) * i / 4.0;
            const double fy = y_min + (y_max - y_min) * i / 4.0;
            const double px = ml + (w - ml - mr) * i / 4.0;
            const double py = h - mb - (h - mt - mb) * i / 4.0;
            const double x_val = x_log_ ? std::pow(10.0, fx) : fx;
            os << "<text x=\"" << px << "\" y=\"" << h - mb + 16
               << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt_g(x_val, 4) << "</text>\n";
            os << "<text x=\"" << ml - 6 << "\" y=\"" << py + 3
               << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_g(fy, 4) << "</text>\n";
            os << "<line x1=\"" << px << "\" y1=\"" << h - mb << "\" x2=\"" << px << "\" y2=\"" << h - mb + 4
               << "\" stroke=\"black\"/>\n";
            os << "<line x1=\"" << ml - 4 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\"" << py
               << "\" stroke=\"black\"/>\n";
        }
        os << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
           << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label_ << "</text>\n";
        os << "<text x=\"16\" y=\"" << (mt + h - mb) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
           << "transform=\"rotate(-90 16 " << (mt + h - mb) / 2 << ")\">" << y_label_ << "</text>\n";

        for (const auto& s : series_) {
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                os << fmt_g(sx(s.x[i]), 6) << ',' << fmt_g(sy(s.y[i]), 6) << ' ';
            os << "\"/>\n";
        }
        double ly = mt + 8;
        for (const auto& s : series_) {
            os << "<line x1=\"" << w - mr - 150 << "\" y1=\"" << ly << "\" x2=\"" << w - mr - 130 << "\" y2=\""
               << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
            os << "<text x=\"" << w - mr - 125 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << s.name
               << "</text>\n";
            ly += 16;
        }
        os << "</svg>\n";
    }

private:
    struct Series {
        std::string name;
        std::vector<double> x, y;
        std::string color;
    };
    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
    bool x_log_ = false;
};

}  // namespace aed
