/*
 Copyright 2026 The cecgap authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cecgap {

// Hand-rolled SVG line charts: figures are a convenience, the CSV files are
// the contract. Only what the built-in plots need: polylines, ticks, legend,
// optionally logarithmic axes.

struct SvgSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<SvgSeries> series;
};

namespace detail {

inline const char* series_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[i % 8];
}

inline std::string fmt_tick(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step) ticks.push_back(t);
  return ticks;
}

inline std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  for (int e = static_cast<int>(std::ceil(std::log10(lo) - 1e-12));
       e <= static_cast<int>(std::floor(std::log10(hi) + 1e-12)); ++e) {
    ticks.push_back(std::pow(10.0, e));
  }
  if (ticks.empty()) ticks = {lo, hi};
  return ticks;
}

}  // namespace detail

inline std::string render_svg_chart(const SvgChart& chart) {
  const double width = 720, height = 480;
  const double ml = 80, mr = 160, mt = 48, mb = 56;

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : chart.series) {
    for (const auto& [x, y] : s.points) {
      if (chart.log_x && !(x > 0.0)) continue;
      if (chart.log_y && !(y > 0.0)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmin <= xmax) || !(ymin <= ymax))
    throw std::invalid_argument("chart has no drawable points");
  if (xmin == xmax) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymin == ymax) {
    ymin = chart.log_y ? ymin * 0.5 : ymin - 0.5;
    ymax = chart.log_y ? ymax * 2.0 : ymax + 0.5;
  }

  const auto tx = [&](double x) {
    const double t = chart.log_x ? (std::log(x) - std::log(xmin)) / (std::log(xmax) - std::log(xmin))
                                 : (x - xmin) / (xmax - xmin);
    return ml + t * (width - ml - mr);
  };
  const auto ty = [&](double y) {
    const double t = chart.log_y ? (std::log(y) - std::log(ymin)) / (std::log(ymax) - std::log(ymin))
                                 : (y - ymin) / (ymax - ymin);
    return height - mb - t * (height - mt - mb);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
      << "font-family=\"sans-serif\">" << chart.title << "</text>\n";

  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr << "\" y2=\""
      << height - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n";

  const auto xticks = chart.log_x ? detail::log_ticks(xmin, xmax) : detail::linear_ticks(xmin, xmax);
  for (double t : xticks) {
    if (t < xmin || t > xmax) continue;
    const double px = tx(t);
    svg << "<line x1=\"" << px << "\" y1=\"" << height - mb << "\" x2=\"" << px << "\" y2=\""
        << height - mb + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px << "\" y=\"" << height - mb + 20
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
        << detail::fmt_tick(t) << "</text>\n";
  }
  const auto yticks = chart.log_y ? detail::log_ticks(ymin, ymax) : detail::linear_ticks(ymin, ymax);
  for (double t : yticks) {
    if (t < ymin || t > ymax) continue;
    const double py = ty(t);
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\"" << py
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
        << detail::fmt_tick(t) << "</text>\n";
  }

  svg << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << chart.x_label
      << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (mt + height - mb) / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" transform=\"rotate(-90 18 "
      << (mt + height - mb) / 2 << ")\">" << chart.y_label << "</text>\n";

  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto& s = chart.series[i];
    std::ostringstream pts;
    bool any = false;
    for (const auto& [x, y] : s.points) {
      if (chart.log_x && !(x > 0.0)) continue;
      if (chart.log_y && !(y > 0.0)) continue;
      pts << tx(x) << ',' << ty(y) << ' ';
      any = true;
    }
    if (!any) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << detail::series_color(i)
        << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    const double ly = mt + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << width - mr + 10 << "\" y1=\"" << ly << "\" x2=\"" << width - mr + 34
        << "\" y2=\"" << ly << "\" stroke=\"" << detail::series_color(i) << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << width - mr + 40 << "\" y=\"" << ly + 4
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << s.name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

inline void write_svg_chart(const std::string& path, const SvgChart& chart) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  out << render_svg_chart(chart);
}

}  // namespace cecgap
