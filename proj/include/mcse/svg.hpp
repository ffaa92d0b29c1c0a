#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcse/baseball.hpp"
#include "mcse/error.hpp"
#include "mcse/metrics.hpp"

namespace mcse::svg {

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
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

// Round step for about `target` ticks across [lo, hi].
inline double tick_step(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

inline std::string tick_label(double v, double step) {
  char buf[32];
  const int digits = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step) - 1e-9));
  std::snprintf(buf, sizeof buf, "%.*f", digits, std::abs(v) < step * 1e-9 ? 0.0 : v);
  return buf;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct Frame {
  double width = 640, height = 420;
  double left = 70, right = 160, top = 40, bottom = 55;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;

  double px(double x) const { return left + (x - x_lo) / (x_hi - x_lo) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y_lo) / (y_hi - y_lo) * (height - top - bottom); }
};

inline std::string open(const Frame& f, const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(f.width) + "\" height=\"" + num(f.height) +
                  "\" viewBox=\"0 0 " + num(f.width) + " " + num(f.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(f.width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) + "</text>\n";
  return s;
}

inline std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label) {
  std::string s;
  const double x0 = f.px(f.x_lo), x1 = f.px(f.x_hi), y0 = f.py(f.y_lo), y1 = f.py(f.y_hi);
  s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" + num(x1 - x0) + "\" height=\"" + num(y0 - y1) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  const double xs = tick_step(f.x_lo, f.x_hi), ys = tick_step(f.y_lo, f.y_hi);
  for (double t = std::ceil(f.x_lo / xs - 1e-9) * xs; t <= f.x_hi + xs * 1e-9; t += xs) {
    const double x = f.px(t);
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x) + "\" y2=\"" + num(y0 + 5) + "\" stroke=\"black\"/>";
    s += "<text x=\"" + num(x) + "\" y=\"" + num(y0 + 18) + "\" text-anchor=\"middle\">" + tick_label(t, xs) + "</text>\n";
  }
  for (double t = std::ceil(f.y_lo / ys - 1e-9) * ys; t <= f.y_hi + ys * 1e-9; t += ys) {
    const double y = f.py(t);
    s += "<line x1=\"" + num(x0 - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y) + "\" stroke=\"black\"/>";
    s += "<text x=\"" + num(x0 - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + tick_label(t, ys) + "</text>\n";
  }
  s += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(f.height - 12) + "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  s += "<text transform=\"translate(18," + num((y0 + y1) / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       escape(y_label) + "</text>\n";
  return s;
}

inline std::string legend(const Frame& f, const std::vector<std::string>& labels) {
  std::string s;
  const double x = f.width - f.right + 15;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = f.top + 10 + 20.0 * static_cast<double>(i);
    const char* color = kPalette[i % std::size(kPalette)];
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x + 20) + "\" y2=\"" + num(y) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>";
    s += "<text x=\"" + num(x + 26) + "\" y=\"" + num(y + 4) + "\">" + escape(labels[i]) + "</text>\n";
  }
  return s;
}

inline std::string line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                             const std::vector<Series>& series) {
  if (series.empty()) throw InvalidParameter("nothing to plot");
  Frame f;
  double x_lo = INFINITY, x_hi = -INFINITY, y_hi = -INFINITY, y_lo = INFINITY;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  if (!std::isfinite(x_lo)) throw InvalidParameter("no finite points to plot");
  if (x_hi == x_lo) x_hi = x_lo + 1;
  y_lo = std::min(0.0, y_lo);
  if (y_hi <= y_lo) y_hi = y_lo + 1;
  f.x_lo = x_lo;
  f.x_hi = x_hi;
  f.y_lo = y_lo;
  f.y_hi = y_lo + (y_hi - y_lo) * 1.05;

  std::string s = open(f, title) + axes(f, x_label, y_label);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::string d;
    for (auto [x, y] : series[i].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      d += (d.empty() ? "M" : " L") + num(f.px(x)) + "," + num(f.py(y));
    }
    s += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + kPalette[i % std::size(kPalette)] + "\" stroke-width=\"2\"/>\n";
    labels.push_back(series[i].label);
  }
  return s + legend(f, labels) + "</svg>\n";
}

struct LabeledEllipse {
  std::string label;
  baseball::Ellipse ellipse;
};

// Ellipses in data coordinates, drawn with equal x and y scales.
inline std::string ellipse_plot(const std::string& title, const std::vector<LabeledEllipse>& ellipses,
                                const std::optional<Rect>& zone, const std::string& x_label = "plate_x (ft)",
                                const std::string& y_label = "plate_z (ft)") {
  if (ellipses.empty()) throw InvalidParameter("nothing to plot");
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  auto grow = [&](double x0, double x1, double y0, double y1) {
    x_lo = std::min(x_lo, x0);
    x_hi = std::max(x_hi, x1);
    y_lo = std::min(y_lo, y0);
    y_hi = std::max(y_hi, y1);
  };
  for (const auto& le : ellipses) {
    const auto& e = le.ellipse;
    // Axis-aligned bounding box of the rotated ellipse.
    const double c = std::cos(e.angle), s = std::sin(e.angle);
    const double hx = std::hypot(e.semi_major * c, e.semi_minor * s);
    const double hy = std::hypot(e.semi_major * s, e.semi_minor * c);
    grow(e.center.x - hx, e.center.x + hx, e.center.y - hy, e.center.y + hy);
  }
  if (zone) grow(zone->x_lo, zone->x_hi, zone->y_lo, zone->y_hi);
  const double pad = 0.1 * std::max(x_hi - x_lo, y_hi - y_lo) + 1e-9;
  x_lo -= pad;
  x_hi += pad;
  y_lo -= pad;
  y_hi += pad;
  Frame f;
  f.width = 600;
  f.height = 560;
  // Equal aspect: widen whichever span is short.
  const double pw = f.width - f.left - f.right, ph = f.height - f.top - f.bottom;
  const double scale = std::max((x_hi - x_lo) / pw, (y_hi - y_lo) / ph);
  const double cx = 0.5 * (x_lo + x_hi), cy = 0.5 * (y_lo + y_hi);
  f.x_lo = cx - 0.5 * scale * pw;
  f.x_hi = cx + 0.5 * scale * pw;
  f.y_lo = cy - 0.5 * scale * ph;
  f.y_hi = cy + 0.5 * scale * ph;

  std::string s = open(f, title) + axes(f, x_label, y_label);
  if (zone)
    s += "<rect x=\"" + num(f.px(zone->x_lo)) + "\" y=\"" + num(f.py(zone->y_hi)) + "\" width=\"" +
         num(f.px(zone->x_hi) - f.px(zone->x_lo)) + "\" height=\"" + num(f.py(zone->y_lo) - f.py(zone->y_hi)) +
         "\" fill=\"none\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < ellipses.size(); ++i) {
    const auto& e = ellipses[i].ellipse;
    const double deg = -e.angle * 180.0 / 3.14159265358979323846;  // SVG y points down
    s += "<ellipse cx=\"" + num(f.px(e.center.x)) + "\" cy=\"" + num(f.py(e.center.y)) + "\" rx=\"" +
         num(e.semi_major / scale) + "\" ry=\"" + num(e.semi_minor / scale) + "\" transform=\"rotate(" + num(deg) + " " +
         num(f.px(e.center.x)) + " " + num(f.py(e.center.y)) + ")\" fill=\"none\" stroke=\"" +
         kPalette[i % std::size(kPalette)] + "\" stroke-width=\"2\"/>\n";
    labels.push_back(ellipses[i].label);
  }
  return s + legend(f, labels) + "</svg>\n";
}

}  // namespace mcse::svg
