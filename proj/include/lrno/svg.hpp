#pragma once

#include <string>
#include <vector>

#include "lrno/bounds.hpp"

namespace lrno::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::vector<Series> series;
};

// Panels side by side, shared axis labels. Nonpositive y values are dropped
// on a log axis.
std::string line_chart(const std::vector<Panel>& panels, const std::string& x_label, const std::string& y_label,
                       bool log_y);

// Filled contour of delta over the (xi, p) grid; infeasible cells are grey.
std::string contour(const std::vector<bounds::ContourCell>& cells, const std::string& title,
                    const std::string& x_label, const std::string& y_label);

}  // namespace lrno::svg
