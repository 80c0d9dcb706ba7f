#pragma once

#include <map>
#include <string>
#include <vector>

namespace dtaas::plot {

struct Point {
    double x = 0.0;
    double mean = 0.0;
    double std = 0.0;
};

struct Series {
    std::string name;
    std::vector<Point> points;  // sorted by x
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

/// Static SVG line chart with one polyline per series and +-std error bars.
std::string render_svg(const Chart& chart);

/// Groups a sweep CSV (x_value, controller, metric, mean, std) into one chart
/// per metric, keyed by metric name.
std::map<std::string, Chart> charts_from_sweep(const std::string& csv_text, const std::string& x_label);

}  // namespace dtaas::plot
