#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace countchain {

struct ChartSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<ChartSeries> series;
};

/// Static SVG rendering; output is a pure function of the chart contents.
void write_svg(std::ostream& os, const LineChart& chart);

}  // namespace countchain
