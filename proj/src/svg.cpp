// Copyright 2026 The Oligo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "oligo/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "oligo/error.hpp"

namespace oligo::svg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (lo > hi) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
};

}  // namespace

void write_plot(const Plot& plot, const std::string& path) {
  const double left = 64, right = 16, top = 34, bottom = 64;
  const double strip_height = plot.strips.empty() ? 0.0 : 14.0;
  const double plot_w = plot.width - left - right;
  const double plot_h = plot.height - top - bottom - strip_height;

  Range xr, yr;
  for (const Series& s : plot.series) {
    for (double v : s.x) xr.include(v);
    for (double v : s.y) yr.include(v);
    for (double v : s.band_lo) yr.include(v);
    for (double v : s.band_hi) yr.include(v);
  }
  for (const Strip& s : plot.strips) {
    xr.include(s.x0);
    xr.include(s.x1);
  }
  xr.pad();
  yr.pad();

  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto py = [&](double y) {
    return top + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width
      << "\" height=\"" << plot.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << plot.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">"
      << plot.title << "</text>\n";

  // axes and ticks
  out << "<g stroke=\"#333\" stroke-width=\"1\" font-family=\"sans-serif\" "
         "font-size=\"11\" fill=\"#333\">\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
      << left + plot_w << "\" y2=\"" << top + plot_h << "\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << top + plot_h << "\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = xr.lo + (xr.hi - xr.lo) * k / 5.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * k / 5.0;
    out << "<line x1=\"" << px(xv) << "\" y1=\"" << top + plot_h << "\" x2=\""
        << px(xv) << "\" y2=\"" << top + plot_h + 4 << "\"/>\n";
    out << "<text x=\"" << px(xv) << "\" y=\"" << top + plot_h + 16
        << "\" text-anchor=\"middle\" stroke=\"none\">" << num(xv)
        << "</text>\n";
    out << "<line x1=\"" << left - 4 << "\" y1=\"" << py(yv) << "\" x2=\""
        << left << "\" y2=\"" << py(yv) << "\"/>\n";
    out << "<text x=\"" << left - 7 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" stroke=\"none\">" << num(yv) << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\""
      << plot.height - 8 - strip_height
      << "\" text-anchor=\"middle\" stroke=\"none\">" << plot.x_label
      << "</text>\n";
  out << "<text x=\"14\" y=\"" << top + plot_h / 2
      << "\" text-anchor=\"middle\" stroke=\"none\" transform=\"rotate(-90 14 "
      << top + plot_h / 2 << ")\">" << plot.y_label << "</text>\n";
  out << "</g>\n";

  // zero line when the range crosses it
  if (yr.lo < 0.0 && yr.hi > 0.0) {
    out << "<line x1=\"" << left << "\" y1=\"" << py(0.0) << "\" x2=\""
        << left + plot_w << "\" y2=\"" << py(0.0)
        << "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";
  }

  for (const Series& s : plot.series) {
    if (!s.band_lo.empty() && s.band_lo.size() == s.x.size() &&
        s.band_hi.size() == s.x.size()) {
      out << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.18\" "
             "stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        out << px(s.x[i]) << ',' << py(s.band_hi[i]) << ' ';
      }
      for (std::size_t i = s.x.size(); i-- > 0;) {
        out << px(s.x[i]) << ',' << py(s.band_lo[i]) << ' ';
      }
      out << "\"/>\n";
    }
  }
  for (const Series& s : plot.series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
          << "\" r=\"2.2\" fill=\"" << s.color << "\"/>\n";
    }
  }

  // regime strip under the x axis
  if (!plot.strips.empty()) {
    const double sy = plot.height - strip_height - 6;
    for (const Strip& s : plot.strips) {
      out << "<rect x=\"" << px(s.x0) << "\" y=\"" << sy << "\" width=\""
          << std::max(1.0, px(s.x1) - px(s.x0)) << "\" height=\""
          << strip_height << "\" fill=\"" << s.color << "\"/>\n";
    }
  }

  // legend
  double ly = top + 8;
  for (const Series& s : plot.series) {
    if (s.label.empty()) continue;
    out << "<line x1=\"" << left + plot_w - 150 << "\" y1=\"" << ly
        << "\" x2=\"" << left + plot_w - 126 << "\" y2=\"" << ly
        << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + plot_w - 120 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label
        << "</text>\n";
    ly += 16;
  }
  out << "</svg>\n";

  std::ofstream file(path);
  if (!file) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  file << out.str();
}

}  // namespace oligo::svg
