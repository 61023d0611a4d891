#pragma once

#include <string>
#include <vector>

namespace hlmcf::cli {

struct Series2D {
  std::vector<double> x, y;
};

/// Single polyline with labelled axes; non-finite points are skipped.
std::string svg_line_plot(const Series2D& data, const std::string& title, const std::string& xlabel,
                          const std::string& ylabel);

}  // namespace hlmcf::cli
