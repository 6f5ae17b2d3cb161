#pragma once

#include <string>
#include <vector>

namespace sem::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Chart {
  std::string title;
  std::vector<Series> series;
};

/// Parses a per-request CSV into header names and numeric rows.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;
};
Table parse_csv(const std::string& text);

/// Stacks one line chart per entry into a single SVG document.
std::string render_svg(const std::vector<Chart>& charts);

}  // namespace sem::cli
