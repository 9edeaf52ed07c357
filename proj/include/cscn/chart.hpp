#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cscn::chart {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal self-contained SVG line chart: axes, ticks, legend, one polyline
// per series. Deterministic output for identical input.
void write_line_chart(std::ostream& os, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

}  // namespace cscn::chart
