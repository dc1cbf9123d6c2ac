#pragma once

#include <optional>
#include <string>
#include <vector>

namespace drsim {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
};

/// Shaded region between two curves sharing one x grid.
struct SvgBand {
    std::vector<double> x;
    std::vector<double> lo;
    std::vector<double> hi;
    std::string color = "#aec7e8";
};

struct SvgChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<SvgSeries> series;
    std::optional<SvgBand> band;
    int width = 720;
    int height = 360;
};

/// Self-contained SVG line chart. Output depends only on the input.
std::string render_svg(const SvgChart& chart);

} // namespace drsim
