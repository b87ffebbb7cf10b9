#pragma once

#include <string>
#include <vector>

namespace slic {

// One polyline on a chart; x and y must have equal length.
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

// Self-contained SVG line chart (fixed 720x460 canvas, auto-scaled axes,
// tick labels, legend). No external renderer dependencies.
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<PlotSeries>& series);

}  // namespace slic
