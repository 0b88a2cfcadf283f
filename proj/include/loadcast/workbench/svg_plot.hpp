#pragma once

#include <span>
#include <string>
#include <vector>

namespace loadcast::workbench {

struct PlotSeries {
    std::string label;
    std::vector<double> values;
    std::string colour;
};

// Line chart with axes, tick labels and a legend as a standalone SVG document.
std::string render_line_chart(const std::vector<PlotSeries>& series, const std::string& title,
                              const std::string& x_label = "hour", const std::string& y_label = "load");

// Actual vs predicted chart written to `path`; lengths must match and be non-empty.
void emit_plot(std::span<const double> actual, std::span<const double> predicted, const std::string& title,
               const std::string& path);

}  // namespace loadcast::workbench
