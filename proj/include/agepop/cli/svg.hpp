#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "agepop/error.hpp"

// Self-contained SVG line charts (time series, contour polylines). Purely a
// display aid; the CSV files are the normative output.

namespace agepop::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool closed = false;  // draw as a closed polygon (contours)
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool equal_aspect = false;
};

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  return colors[i % 6];
}

inline std::string num(double v) {
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

}  // namespace detail

inline std::string render_svg(const Chart& c) {
  constexpr double W = 720, H = 440, L = 70, R = 150, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : c.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-300) y0 -= 0.5, y1 += 0.5;
  const double pw = W - L - R, ph = H - T - B;
  double sx = pw / (x1 - x0), sy = ph / (y1 - y0);
  if (c.equal_aspect) sx = sy = std::min(sx, sy);
  auto px = [&](double x) { return L + (x - x0) * sx; };
  auto py = [&](double y) { return T + ph - (y - y0) * sy; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << c.title << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << L + pw * k / 4.0 << "\" y=\"" << T + ph + 16 << "\" text-anchor=\"middle\">"
      << detail::num(xv) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << T + ph - ph * k / 4.0 + 4 << "\" text-anchor=\"end\">"
      << detail::num(yv) << "</text>\n";
  }
  if (y0 < 0 && y1 > 0) {
    o << "<line x1=\"" << L << "\" x2=\"" << L + pw << "\" y1=\"" << py(0) << "\" y2=\"" << py(0)
      << "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";
  }
  o << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << c.x_label << "</text>\n";
  o << "<text transform=\"translate(16," << T + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << c.y_label << "</text>\n";
  for (std::size_t s = 0; s < c.series.size(); ++s) {
    const Series& se = c.series[s];
    o << "<" << (se.closed ? "polygon" : "polyline") << " fill=\"none\" stroke=\"" << detail::palette(s)
      << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < std::min(se.x.size(), se.y.size()); ++i) {
      if (!std::isfinite(se.x[i]) || !std::isfinite(se.y[i])) continue;
      o << detail::num(px(se.x[i])) << ',' << detail::num(py(se.y[i])) << ' ';
    }
    o << "\"/>\n";
    o << "<text x=\"" << W - R + 12 << "\" y=\"" << T + 16 + 18 * s << "\" fill=\"" << detail::palette(s)
      << "\">" << se.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline void write_svg(const std::filesystem::path& path, const Chart& c) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << render_svg(c);
}

}  // namespace agepop::cli
