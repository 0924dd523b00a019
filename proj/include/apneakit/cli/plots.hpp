#pragma once

#include <string>
#include <vector>

namespace apneakit::cli {

struct PlotSeries {
  std::string name;
  std::vector<double> values;
};

// Minimal SVG line chart: one polyline per series over a shared 0..n-1 x
// axis, with axis labels and a legend. Deterministic output.
std::string svg_line_chart(const std::string& title,
                           const std::vector<PlotSeries>& series,
                           const std::string& x_label,
                           const std::string& y_label);

}  // namespace apneakit::cli
