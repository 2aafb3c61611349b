#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vrstream/sim.hpp"

namespace vrstream {

void write_report_csv(const std::string& path, const std::vector<report_row>& rows);
void write_aggregate_csv(const std::string& path, const std::vector<aggregate_row>& rows);
void write_learning_curve_csv(const std::string& path, const std::vector<double>& curve);

struct plot_series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

// Self-contained SVG line chart (axes, ticks, legend); output is
// deterministic for identical inputs.
void write_lines_svg(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<plot_series>& series);

} // namespace vrstream
