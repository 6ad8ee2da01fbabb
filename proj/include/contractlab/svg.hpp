#pragma once

#include <string>
#include <vector>

namespace contractlab {

struct SvgSeries {
    std::string label;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

struct SvgMarker {
    double x = 0.0, y = 0.0;
    std::string label;
};

// Static line plot: polylines, point markers and linear axis ticks.
std::string render_svg(const std::vector<SvgSeries>& series, const std::vector<SvgMarker>& markers,
                       const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       int width = 640, int height = 480);

} // namespace contractlab
