#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace sem::cli {

int Table::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
constexpr double kW = 640, kH = 300, kLeft = 64, kRight = 150, kTop = 36, kBottom = 40;

}  // namespace

Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                               std::to_string(t.header.size()) + " cells");
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        row.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": non-numeric cell '" + c + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string render_svg(const std::vector<Chart>& charts) {
  std::ostringstream s;
  const double total_h = kH * static_cast<double>(std::max<std::size_t>(charts.size(), 1));
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << total_h
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t c = 0; c < charts.size(); ++c) {
    const Chart& chart = charts[c];
    const double oy = kH * static_cast<double>(c);
    double x0 = INFINITY, x1 = -INFINITY, y0 = 0.0, y1 = -INFINITY;
    for (const auto& ser : chart.series) {
      for (double v : ser.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
      for (double v : ser.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
    if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0;
    if (!std::isfinite(y1)) y1 = 1.0;
    if (x1 <= x0) x1 = x0 + 1.0;
    if (y1 <= y0) y1 = y0 + 1.0;
    const double pw = kW - kLeft - kRight;
    const double ph = kH - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (v - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return oy + kTop + ph - (v - y0) / (y1 - y0) * ph; };

    s << "<text x=\"" << kLeft << "\" y=\"" << oy + 20 << "\" font-size=\"13\">" << escape(chart.title) << "</text>\n";
    s << "<rect x=\"" << kLeft << "\" y=\"" << oy + kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = x0 + (x1 - x0) * i / 4.0;
      const double yv = y0 + (y1 - y0) * i / 4.0;
      s << "<text x=\"" << px(xv) << "\" y=\"" << oy + kH - kBottom + 16 << "\" text-anchor=\"middle\">" << fmt(xv)
        << "</text>\n";
      s << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
      s << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << py(yv) << "\" y2=\"" << py(yv)
        << "\" stroke=\"#ddd\"/>\n";
    }
    s << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << oy + kH - 6 << "\" text-anchor=\"middle\">t</text>\n";
    for (std::size_t k = 0; k < chart.series.size(); ++k) {
      const Series& ser = chart.series[k];
      const char* color = kColors[k % std::size(kColors)];
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i)
        s << (i ? " " : "") << fmt(px(ser.x[i])) << ',' << fmt(py(ser.y[i]));
      s << "\"/>\n";
      const double ly = oy + kTop + 14 + 16 * static_cast<double>(k);
      s << "<line x1=\"" << kW - kRight + 10 << "\" x2=\"" << kW - kRight + 30 << "\" y1=\"" << ly - 4 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      s << "<text x=\"" << kW - kRight + 34 << "\" y=\"" << ly << "\">" << escape(ser.label) << "</text>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace sem::cli
