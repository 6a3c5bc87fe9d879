#pragma once

// Minimal SVG 1.1 line plot: target vs achieved shift against pixel column.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>

#include "phaseforge/error.hpp"

namespace phaseforge::svg {

namespace detail {

inline std::string num(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s == "-0.00" || s == "-0.0" || s == "-0") s.erase(0, 1);
  return s;
}

// 1-2-5 tick step covering `range` in roughly `target` intervals.
inline double nice_step(double range, int target) {
  const double raw = range / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return (r <= 1.0 ? 1.0 : r <= 2.0 ? 2.0 : r <= 5.0 ? 5.0 : 10.0) * mag;
}

}  // namespace detail

struct Series {
  std::string label;
  std::string color;
  std::span<const double> y;
};

/// Two-curve plot. `x` is the pixel column; y values are shifts in metres,
/// drawn in millimetres.
inline std::string shift_plot(std::span<const double> x, const Series& target, const Series& achieved) {
  if (x.empty() || target.y.size() != x.size() || achieved.y.size() != x.size()) {
    throw Error(ErrorCode::FileFormat, "report needs at least one row with matching series");
  }
  using detail::num;
  constexpr double W = 800, H = 480, left = 80, right = 30, top = 40, bottom = 70;
  const double pw = W - left - right;
  const double ph = H - top - bottom;

  double x0 = *std::min_element(x.begin(), x.end());
  double x1 = *std::max_element(x.begin(), x.end());
  if (x1 == x0) x1 = x0 + 1.0;
  double y0 = 0.0, y1 = 0.0;
  for (auto* s : {&target, &achieved}) {
    for (double v : s->y) {
      y0 = std::min(y0, v * 1e3);
      y1 = std::max(y1, v * 1e3);
    }
  }
  if (y1 - y0 < 1e-9) {
    y0 -= 1.0;
    y1 += 1.0;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double mm) { return top + (y1 - mm) / (y1 - y0) * ph; };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(W, 0) + "\" height=\"" +
         num(H, 0) + "\" viewBox=\"0 0 " + num(W, 0) + " " + num(H, 0) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + num(W, 0) + "\" height=\"" + num(H, 0) + "\" fill=\"white\"/>\n";

  // Axes and ticks.
  out += "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  out += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(left + pw) + "\" y2=\"" +
         num(top + ph) + "\"/>\n";
  out += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" + num(top + ph) +
         "\"/>\n";
  out += "</g>\n";
  out += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
  const double xs = detail::nice_step(x1 - x0, 8);
  for (double v = std::ceil(x0 / xs) * xs; v <= x1 + 1e-9; v += xs) {
    out += "<line x1=\"" + num(px(v)) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(px(v)) + "\" y2=\"" +
           num(top + ph + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(px(v)) + "\" y=\"" + num(top + ph + 20) + "\" text-anchor=\"middle\">" + num(v, 0) +
           "</text>\n";
  }
  const double ys = detail::nice_step(y1 - y0, 6);
  const int yd = ys >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(ys)));
  for (double v = std::ceil(y0 / ys) * ys; v <= y1 + 1e-12; v += ys) {
    out += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(py(v)) + "\" x2=\"" + num(left) + "\" y2=\"" +
           num(py(v)) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(left - 8) + "\" y=\"" + num(py(v) + 4) + "\" text-anchor=\"end\">" + num(v, yd) +
           "</text>\n";
  }
  out += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(H - 20) +
         "\" text-anchor=\"middle\">X-coordinate (projector pixel column)</text>\n";
  out += "<text x=\"20\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
         num(top + ph / 2) + ")\">Pixel shift [mm] (right positive)</text>\n";
  out += "</g>\n";

  // Zero line.
  if (y0 < 0.0 && y1 > 0.0) {
    out += "<line x1=\"" + num(left) + "\" y1=\"" + num(py(0)) + "\" x2=\"" + num(left + pw) + "\" y2=\"" +
           num(py(0)) + "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
  }

  int legend_row = 0;
  for (const Series* s : {&target, &achieved}) {
    out += "<polyline fill=\"none\" stroke=\"" + s->color + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i) out += ' ';
      out += num(px(x[i])) + "," + num(py(s->y[i] * 1e3));
    }
    out += "\"/>\n";
    const double ly = top + 12 + 18 * legend_row++;
    out += "<line x1=\"" + num(left + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(left + 42) + "\" y2=\"" +
           num(ly) + "\" stroke=\"" + s->color + "\" stroke-width=\"1.5\"/>\n";
    out += "<text x=\"" + num(left + 48) + "\" y=\"" + num(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + s->label + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace phaseforge::svg
