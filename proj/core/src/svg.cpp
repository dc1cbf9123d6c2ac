#include "drsim/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace drsim {

namespace {

constexpr double kLeft = 64.0;
constexpr double kRight = 16.0;
constexpr double kTop = 32.0;
constexpr double kBottom = 44.0;

struct Extent {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }

    void settle() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string render_svg(const SvgChart& chart) {
    Extent ex;
    Extent ey;
    for (const auto& s : chart.series) {
        for (double v : s.x) ex.add(v);
        for (double v : s.y) ey.add(v);
    }
    if (chart.band) {
        for (double v : chart.band->x) ex.add(v);
        for (double v : chart.band->lo) ey.add(v);
        for (double v : chart.band->hi) ey.add(v);
    }
    ex.settle();
    ey.settle();
    const double pad = 0.05 * (ey.hi - ey.lo);
    ey.lo -= pad;
    ey.hi += pad;

    const double w = chart.width;
    const double h = chart.height;
    const double pw = w - kLeft - kRight;
    const double ph = h - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - ex.lo) / (ex.hi - ex.lo) * pw; };
    auto py = [&](double y) { return kTop + (1.0 - (y - ey.lo) / (ey.hi - ey.lo)) * ph; };

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"11\">\n",
        chart.width, chart.height);
    out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", chart.width, chart.height);
    out += fmt::format("<text x=\"{:.1f}\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n", w / 2,
                       escape(chart.title));

    for (int i = 0; i <= 4; ++i) {
        const double fy = ey.lo + (ey.hi - ey.lo) * i / 4.0;
        const double fx = ex.lo + (ex.hi - ex.lo) * i / 4.0;
        out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n", kLeft,
                           py(fy), kLeft + pw, py(fy));
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n", kLeft - 4,
                           py(fy) + 4, fy);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.4g}</text>\n", px(fx),
                           kTop + ph + 14, fx);
    }
    out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
                       "stroke=\"#333\"/>\n",
                       kLeft, kTop, pw, ph);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2, h - 8,
                       escape(chart.x_label));
    out += fmt::format("<text x=\"14\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1f})\">{}"
                       "</text>\n",
                       kTop + ph / 2, kTop + ph / 2, escape(chart.y_label));

    if (chart.band && !chart.band->x.empty()) {
        const auto& b = *chart.band;
        std::string pts;
        for (std::size_t i = 0; i < b.x.size(); ++i) {
            pts += fmt::format("{:.1f},{:.1f} ", px(b.x[i]), py(b.hi[i]));
        }
        for (std::size_t i = b.x.size(); i-- > 0;) {
            pts += fmt::format("{:.1f},{:.1f} ", px(b.x[i]), py(b.lo[i]));
        }
        out += fmt::format("<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.6\" stroke=\"none\"/>\n", pts,
                           b.color);
    }

    double legend_y = kTop + 12;
    for (const auto& s : chart.series) {
        std::string pts;
        const std::size_t n = std::min(s.x.size(), s.y.size());
        for (std::size_t i = 0; i < n; ++i) {
            pts += fmt::format("{:.1f},{:.1f} ", px(s.x[i]), py(s.y[i]));
        }
        out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"/>\n", pts,
                           s.color);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" fill=\"{}\">{}</text>\n", kLeft + 8, legend_y, s.color,
                           escape(s.label));
        legend_y += 14;
    }
    out += "</svg>\n";
    return out;
}

} // namespace drsim
