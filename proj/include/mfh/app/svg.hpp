#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace mfh::app {

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
  std::string color = "#1f77b4";
  bool markers = true;
  bool dashed = false;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<SvgSeries> series;
  std::vector<std::string> annotations;
};

namespace detail {

inline std::string fmt(double v, const char* spec = "%.6g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  double map(double v, double px_lo, double px_hi) const {
    const double a = log ? std::log10(lo) : lo, b = log ? std::log10(hi) : hi;
    const double t = ((log ? std::log10(v) : v) - a) / (b - a);
    return px_lo + t * (px_hi - px_lo);
  }
};

inline bool plottable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

inline Axis fit_axis(const std::vector<SvgSeries>& series, bool use_x, bool log) {
  Axis axis;
  axis.log = log;
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (const auto& s : series) {
    for (double v : use_x ? s.x : s.y) {
      if (!plottable(v, log)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (lo > hi) {
    lo = log ? 0.1 : 0.0;
    hi = log ? 1.0 : 1.0;
  }
  if (lo == hi) {
    if (log) {
      lo /= 2.0;
      hi *= 2.0;
    } else {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  if (log) {
    const double pad = std::pow(hi / lo, 0.05);
    axis.lo = lo / pad;
    axis.hi = hi * pad;
  } else {
    const double pad = 0.05 * (hi - lo);
    axis.lo = lo - pad;
    axis.hi = hi + pad;
  }
  return axis;
}

}  // namespace detail

/// Line plot on a fixed 800 x 600 viewBox.
inline std::string render_svg(const SvgPlot& plot) {
  constexpr double kLeft = 90, kRight = 770, kTop = 60, kBottom = 520;
  const auto ax = detail::fit_axis(plot.series, true, plot.log_x);
  const auto ay = detail::fit_axis(plot.series, false, plot.log_y);
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  out += "<text x=\"400\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">" +
         detail::escape(plot.title) + "</text>\n";
  out += "<line x1=\"90\" y1=\"520\" x2=\"770\" y2=\"520\" stroke=\"black\"/>\n";
  out += "<line x1=\"90\" y1=\"60\" x2=\"90\" y2=\"520\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double vx = plot.log_x ? std::pow(10.0, std::log10(ax.lo) + f * (std::log10(ax.hi) - std::log10(ax.lo)))
                                 : ax.lo + f * (ax.hi - ax.lo);
    const double vy = plot.log_y ? std::pow(10.0, std::log10(ay.lo) + f * (std::log10(ay.hi) - std::log10(ay.lo)))
                                 : ay.lo + f * (ay.hi - ay.lo);
    const double px = kLeft + f * (kRight - kLeft);
    const double py = kBottom - f * (kBottom - kTop);
    out += "<line x1=\"" + detail::fmt(px) + "\" y1=\"520\" x2=\"" + detail::fmt(px) +
           "\" y2=\"526\" stroke=\"black\"/>\n";
    out += "<text x=\"" + detail::fmt(px) + "\" y=\"542\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           detail::fmt(vx, "%.3g") + "</text>\n";
    out += "<line x1=\"84\" y1=\"" + detail::fmt(py) + "\" x2=\"90\" y2=\"" + detail::fmt(py) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"80\" y=\"" + detail::fmt(py + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" + detail::fmt(vy, "%.3g") +
           "</text>\n";
  }
  out += "<text x=\"430\" y=\"575\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         detail::escape(plot.x_label) + (plot.log_x ? " (log)" : "") + "</text>\n";
  out += "<text x=\"22\" y=\"290\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
         "transform=\"rotate(-90 22 290)\">" +
         detail::escape(plot.y_label) + (plot.log_y ? " (log)" : "") + "</text>\n";

  double legend_y = 80;
  for (const auto& s : plot.series) {
    std::string points;
    std::string marks;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!detail::plottable(s.x[i], plot.log_x) || !detail::plottable(s.y[i], plot.log_y)) continue;
      const double px = ax.map(s.x[i], kLeft, kRight);
      const double py = ay.map(s.y[i], kBottom, kTop);
      points += detail::fmt(px) + "," + detail::fmt(py) + " ";
      if (s.markers) {
        marks += "<circle cx=\"" + detail::fmt(px) + "\" cy=\"" + detail::fmt(py) + "\" r=\"4\" fill=\"" + s.color +
                 "\"/>\n";
      }
    }
    if (!points.empty()) {
      points.pop_back();
      out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"2\"" +
             (s.dashed ? std::string(" stroke-dasharray=\"6 4\"") : std::string()) + " points=\"" + points + "\"/>\n";
    }
    out += marks;
    if (!s.label.empty()) {
      out += "<text x=\"600\" y=\"" + detail::fmt(legend_y) + "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" +
             s.color + "\">" + detail::escape(s.label) + "</text>\n";
      legend_y += 16;
    }
  }
  double note_y = 80;
  for (const auto& note : plot.annotations) {
    out += "<text x=\"110\" y=\"" + detail::fmt(note_y) +
           "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#b00000\">" + detail::escape(note) + "</text>\n";
    note_y += 18;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace mfh::app
