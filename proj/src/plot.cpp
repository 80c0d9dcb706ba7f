#include "dtaas/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "dtaas/csv.hpp"

namespace dtaas::plot {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const Chart& chart) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : chart.series) {
        for (const auto& p : s.points) {
            if (!std::isfinite(p.mean)) continue;
            const double sd = std::isfinite(p.std) ? p.std : 0.0;
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.mean - sd);
            ymax = std::max(ymax, p.mean + sd);
        }
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(chart.title) << "</text>\n";
    o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double y = ymin + (ymax - ymin) * i / 5.0;
        const double x = xmin + (xmax - xmin) * i / 5.0;
        o << "<line x1=\"" << kLeft << "\" x2=\"" << num(kLeft + pw) << "\" y1=\"" << num(sy(y)) << "\" y2=\""
          << num(sy(y)) << "\" stroke=\"#dddddd\"/>\n";
        o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(sy(y) + 4) << "\" text-anchor=\"end\">" << label(y)
          << "</text>\n";
        o << "<text x=\"" << num(sx(x)) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\">"
          << label(x) << "</text>\n";
    }
    o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 15) << "\" text-anchor=\"middle\">"
      << escape(chart.x_label) << "</text>\n";
    o << "<text transform=\"translate(16," << num(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(chart.y_label) << "</text>\n";

    for (std::size_t i = 0; i < chart.series.size(); ++i) {
        const auto& s = chart.series[i];
        const char* color = kColors[i % (sizeof kColors / sizeof *kColors)];
        std::ostringstream pts;
        for (const auto& p : s.points) {
            if (!std::isfinite(p.mean)) continue;
            pts << num(sx(p.x)) << "," << num(sy(p.mean)) << " ";
            if (std::isfinite(p.std) && p.std > 0) {
                o << "<line x1=\"" << num(sx(p.x)) << "\" x2=\"" << num(sx(p.x)) << "\" y1=\"" << num(sy(p.mean - p.std))
                  << "\" y2=\"" << num(sy(p.mean + p.std)) << "\" stroke=\"" << color << "\"/>\n";
            }
            o << "<circle cx=\"" << num(sx(p.x)) << "\" cy=\"" << num(sy(p.mean)) << "\" r=\"3\" fill=\"" << color
              << "\"/>\n";
        }
        o << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << color << "\" points=\"" << pts.str() << "\"/>\n";
        const double ly = kTop + 16 + 20 * static_cast<double>(i);
        o << "<line x1=\"" << num(kLeft + pw + 12) << "\" x2=\"" << num(kLeft + pw + 36) << "\" y1=\"" << num(ly)
          << "\" y2=\"" << num(ly) << "\" stroke-width=\"2\" stroke=\"" << color << "\"/>\n";
        o << "<text x=\"" << num(kLeft + pw + 42) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::map<std::string, Chart> charts_from_sweep(const std::string& csv_text, const std::string& x_label) {
    std::istringstream in(csv_text);
    const auto t = csv::Table::read(in);
    std::map<std::string, std::map<std::string, std::vector<Point>>> grouped;
    for (std::size_t i = 0; i < t.size(); ++i) {
        grouped[t.text(i, "metric")][t.text(i, "controller")].push_back(
            {t.real(i, "x_value"), t.real(i, "mean"), t.real(i, "std")});
    }
    std::map<std::string, Chart> out;
    for (auto& [metric, by_controller] : grouped) {
        Chart c;
        c.title = metric + " vs " + x_label;
        c.x_label = x_label;
        c.y_label = metric;
        for (auto& [name, pts] : by_controller) {
            std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
            c.series.push_back({name, std::move(pts)});
        }
        out.emplace(metric, std::move(c));
    }
    return out;
}

}  // namespace dtaas::plot
