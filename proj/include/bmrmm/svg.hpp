#pragma once

// Minimal static SVG figures for summary and diagnostic plot data.

#include <string>
#include <vector>

namespace bmrmm::svg {

/// Grouped bars: one group per name, one bar per entry of its value vector.
std::string bar_groups(const std::string& title, const std::vector<std::string>& groups,
                       const std::vector<std::vector<double>>& values);

/// Grayscale heatmap of a matrix with values in [0, 1].
std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels, const std::vector<std::vector<double>>& values);

/// Line plot of one series against its index.
std::string line_plot(const std::string& title, const std::vector<double>& values);

}  // namespace bmrmm::svg
