#pragma once

// Static SVG line/scatter plots. Linear or log10 y axis.

#include <string>
#include <vector>

namespace qdeloc::harness {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool points = true;
    bool line = false;
    bool dashed = false;
};

struct Plot {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool log_y = false;
    int width = 760;
    int height = 440;
    std::vector<PlotSeries> series;
};

/// Non-finite points (and non-positive ones on a log axis) are skipped.
std::string render_svg(const Plot &plot);
void write_svg(const std::string &path, const Plot &plot);

/// A qualitative palette entry.
std::string palette(std::size_t i);

} // namespace qdeloc::harness
