#pragma once

#include <string>
#include <vector>

namespace rkm::cli {

struct ScatterPoint {
    double x;
    double y;
    int group;
};

struct ScatterStyle {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 640;
    int height = 400;
};

/// Self-contained SVG scatter plot, one color per group, with axes, tick
/// labels, a zero line when zero is in range, and a legend.
std::string render_scatter(const std::vector<ScatterPoint>& points, const ScatterStyle& style);

void write_text_file(const std::string& path, const std::string& contents);

} // namespace rkm::cli
