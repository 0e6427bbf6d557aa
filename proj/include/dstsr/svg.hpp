#pragma once

#include <string>
#include <vector>

namespace dstsr::svg {

struct Line {
    std::string label;
    std::vector<double> values; // NaN breaks the polyline
};

/// Static line chart; x is the sample index (hours from the first point).
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Line>& lines);

struct BarGroup {
    std::string label; // e.g. "RMSE"
    std::vector<double> values; // one per category
};

/// Grouped bar chart: one cluster per category, one bar per group.
std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::string>& categories, const std::vector<BarGroup>& groups);

std::string escape_xml(const std::string& text);

} // namespace dstsr::svg
