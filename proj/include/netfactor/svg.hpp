#pragma once

#include <string>
#include <vector>

namespace netfactor::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> err;  ///< optional symmetric error bars
};

/// Line plot with markers and optional error bars.
std::string line_plot(const std::vector<Series>& series, const std::string& title, const std::string& xLabel,
                      const std::string& yLabel);

struct Bar {
    std::string label;
    double value = 0.0;
    bool highlighted = false;  ///< drawn in the accent color
};

/// Horizontal bar chart (one bar per row, top to bottom).
std::string bar_plot(const std::vector<Bar>& bars, const std::string& title, const std::string& valueLabel);

}  // namespace netfactor::svg
