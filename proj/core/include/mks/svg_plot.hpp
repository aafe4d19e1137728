#pragma once

#include <string>
#include <vector>

namespace mks::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    // Optional symmetric band half-width per point, drawn as a shaded region.
    std::vector<double> band;
    std::string color = "#1f77b4";
    bool line = true; // false -> scatter markers
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 760;
    int height = 560;
    bool diagonal = false; // y = x reference line (parity plots)
    // When set (same length as the first series), markers are colored by
    // value through a viridis ramp and a colorbar is drawn.
    std::vector<double> color_values;
    std::string color_label;
};

// Self-contained static SVG; no timestamps, byte-stable for equal inputs.
std::string render_chart(const ChartSpec& spec, const std::vector<Series>& series);

void write_svg(const std::string& path, const std::string& svg_text);

} // namespace mks::svg
