#pragma once

#include <string>
#include <vector>

namespace cml::svg {

struct Point {
  double x = 0.0;
  double y = 0.0;
  double err = 0.0;  // half-length of the vertical error bar
};

struct Series {
  std::string label;
  bool dashed = false;
  std::vector<Point> points;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Standalone SVG document: axes with ticks and labels, one polyline per
/// series with error bars, and a legend in series order.
std::string render(const LineChart& chart);

/// Escapes &, <, >, " for use in SVG text and attributes.
std::string escape(const std::string& text);

}  // namespace cml::svg
