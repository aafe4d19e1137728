#include "mks/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "mks/container.hpp"
#include "mks/errors.hpp"

namespace mks::svg {

namespace {

std::string num(double v, const char* fmt = "%.6g") {
    char buf[40];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

std::string px(double v) { return num(v, "%.2f"); }

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void include(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void pad() {
        if (!(hi > lo)) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double span = hi - lo;
        lo -= 0.05 * span;
        hi += 0.05 * span;
    }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    double step = std::pow(10.0, std::floor(std::log10(span / target)));
    const double ratio = span / target / step;
    if (ratio >= 5.0) step *= 5.0;
    else if (ratio >= 2.0) step *= 2.0;
    std::vector<double> ticks;
    double t = std::ceil(lo / step) * step;
    for (; t <= hi + 1e-12 * span; t += step) {
        if (std::abs(t) < 1e-12 * span) t = 0.0;
        ticks.push_back(t);
    }
    return ticks;
}

// Compact viridis ramp, linearly interpolated.
std::string viridis(double t) {
    static const int anchors[9][3] = {
        {68, 1, 84},   {70, 50, 126},  {54, 92, 141},  {39, 127, 142},
        {33, 145, 140}, {31, 161, 135}, {74, 193, 109}, {160, 218, 57},
        {253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * 8.0;
    const int i = std::min(7, static_cast<int>(pos));
    const double f = pos - i;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(anchors[i][0] + f * (anchors[i + 1][0] - anchors[i][0]))),
                  static_cast<int>(std::lround(anchors[i][1] + f * (anchors[i + 1][1] - anchors[i][1]))),
                  static_cast<int>(std::lround(anchors[i][2] + f * (anchors[i + 1][2] - anchors[i][2]))));
    return buf;
}

} // namespace

std::string render_chart(const ChartSpec& spec, const std::vector<Series>& series) {
    if (series.empty()) throw ArgumentError("render_chart: no series");
    const bool colorbar = !spec.color_values.empty();
    if (colorbar && spec.color_values.size() != series[0].x.size())
        throw ArgumentError("render_chart: color_values length mismatch");

    const double ml = 64, mr = colorbar ? 96 : 24, mt = 36, mb = 52;
    const double pw = spec.width - ml - mr;
    const double ph = spec.height - mt - mb;

    Range rx, ry;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size())
            throw ArgumentError("render_chart: series x/y length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            rx.include(s.x[i]);
            ry.include(s.y[i]);
            if (!s.band.empty()) {
                ry.include(s.y[i] - s.band[i]);
                ry.include(s.y[i] + s.band[i]);
            }
        }
    }
    if (spec.diagonal) {
        const double lo = std::min(rx.lo, ry.lo), hi = std::max(rx.hi, ry.hi);
        rx.lo = ry.lo = lo;
        rx.hi = ry.hi = hi;
    }
    rx.pad();
    ry.pad();

    auto sx = [&](double v) { return ml + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto sy = [&](double v) { return mt + ph - (v - ry.lo) / (ry.hi - ry.lo) * ph; };

    Range rc;
    for (double v : spec.color_values) rc.include(v);
    if (colorbar && !(rc.hi > rc.lo)) {
        rc.lo -= 0.5;
        rc.hi += 0.5;
    }

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
        << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << " "
        << spec.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<g font-family=\"Helvetica,Arial,sans-serif\" font-size=\"12\">\n";
    if (!spec.title.empty())
        out << "<text x=\"" << px(ml + pw / 2) << "\" y=\"20\" text-anchor=\"middle\" "
            << "font-size=\"14\">" << spec.title << "</text>\n";

    // Axes and ticks.
    out << "<rect x=\"" << px(ml) << "\" y=\"" << px(mt) << "\" width=\"" << px(pw)
        << "\" height=\"" << px(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (double t : nice_ticks(rx.lo, rx.hi)) {
        out << "<line x1=\"" << px(sx(t)) << "\" y1=\"" << px(mt + ph) << "\" x2=\""
            << px(sx(t)) << "\" y2=\"" << px(mt + ph + 5) << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << px(sx(t)) << "\" y=\"" << px(mt + ph + 18)
            << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
    }
    for (double t : nice_ticks(ry.lo, ry.hi)) {
        out << "<line x1=\"" << px(ml - 5) << "\" y1=\"" << px(sy(t)) << "\" x2=\""
            << px(ml) << "\" y2=\"" << px(sy(t)) << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << px(ml - 8) << "\" y=\"" << px(sy(t) + 4)
            << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
    }
    out << "<text x=\"" << px(ml + pw / 2) << "\" y=\"" << px(spec.height - 12)
        << "\" text-anchor=\"middle\">" << spec.x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << px(mt + ph / 2)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << px(mt + ph / 2)
        << ")\">" << spec.y_label << "</text>\n";

    if (spec.diagonal)
        out << "<line x1=\"" << px(sx(rx.lo)) << "\" y1=\"" << px(sy(rx.lo)) << "\" x2=\""
            << px(sx(rx.hi)) << "\" y2=\"" << px(sy(rx.hi))
            << "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        if (!s.band.empty()) {
            out << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << px(sx(s.x[i])) << "," << px(sy(s.y[i] + s.band[i])) << " ";
            for (std::size_t i = s.x.size(); i-- > 0;)
                out << px(sx(s.x[i])) << "," << px(sy(s.y[i] - s.band[i])) << " ";
            out << "\"/>\n";
        }
        if (s.line && s.x.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << s.color
                << "\" stroke-width=\"1.6\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << px(sx(s.x[i])) << "," << px(sy(s.y[i])) << " ";
            out << "\"/>\n";
        } else {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                const std::string fill =
                    colorbar && si == 0
                        ? viridis((spec.color_values[i] - rc.lo) / (rc.hi - rc.lo))
                        : s.color;
                out << "<circle cx=\"" << px(sx(s.x[i])) << "\" cy=\"" << px(sy(s.y[i]))
                    << "\" r=\"2.4\" fill=\"" << fill << "\" fill-opacity=\"0.8\"/>\n";
            }
        }
    }

    // Legend for multi-series line charts.
    if (series.size() > 1 && !colorbar) {
        double ly = mt + 14;
        for (const auto& s : series) {
            if (s.label.empty()) continue;
            out << "<line x1=\"" << px(ml + pw - 150) << "\" y1=\"" << px(ly - 4)
                << "\" x2=\"" << px(ml + pw - 128) << "\" y2=\"" << px(ly - 4)
                << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
            out << "<text x=\"" << px(ml + pw - 122) << "\" y=\"" << px(ly) << "\">"
                << s.label << "</text>\n";
            ly += 16;
        }
    }

    if (colorbar) {
        const double bx = spec.width - mr + 18, bw = 14, bh = ph * 0.8, by = mt + 0.1 * ph;
        const int steps = 48;
        for (int i = 0; i < steps; ++i) {
            const double t0 = static_cast<double>(i) / steps;
            out << "<rect x=\"" << px(bx) << "\" y=\"" << px(by + bh - (i + 1) * bh / steps)
                << "\" width=\"" << px(bw) << "\" height=\"" << px(bh / steps + 0.5)
                << "\" fill=\"" << viridis(t0) << "\" stroke=\"none\"/>\n";
        }
        out << "<rect x=\"" << px(bx) << "\" y=\"" << px(by) << "\" width=\"" << px(bw)
            << "\" height=\"" << px(bh) << "\" fill=\"none\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << px(bx + bw + 4) << "\" y=\"" << px(by + bh + 4) << "\">"
            << num(rc.lo) << "</text>\n";
        out << "<text x=\"" << px(bx + bw + 4) << "\" y=\"" << px(by + 4) << "\">"
            << num(rc.hi) << "</text>\n";
        if (!spec.color_label.empty())
            out << "<text x=\"" << px(bx + bw / 2) << "\" y=\"" << px(by - 8)
                << "\" text-anchor=\"middle\">" << spec.color_label << "</text>\n";
    }

    out << "</g>\n</svg>\n";
    return out.str();
}

void write_svg(const std::string& path, const std::string& svg_text) {
    io::atomic_write(path, svg_text);
}

} // namespace mks::svg
