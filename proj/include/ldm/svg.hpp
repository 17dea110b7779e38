#pragma once

#include <array>
#include <string>
#include <vector>

namespace ldm {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Polyline chart with linear axes. Non-finite points are skipped.
void write_line_chart(const std::string& path, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<Series>& series);

/// Scatter plot of 2D points; `marks` are drawn as larger red dots.
void write_scatter(const std::string& path, const std::string& title, const std::vector<std::array<double, 2>>& points,
                   const std::vector<std::array<double, 2>>& marks = {});

}  // namespace ldm
