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

#ifndef OLIGO_SVG_HPP_
#define OLIGO_SVG_HPP_

#include <string>
#include <vector>

namespace oligo::svg {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band_lo;  // optional; same length as x when present
  std::vector<double> band_hi;
  std::string color = "#1f77b4";
  std::string label;
};

// Colored strip segment under the x axis (regime bars).
struct Strip {
  double x0 = 0.0;
  double x1 = 0.0;
  std::string color;
  std::string label;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<Strip> strips;
  int width = 760;
  int height = 480;
};

void write_plot(const Plot& plot, const std::string& path);

}  // namespace oligo::svg

#endif  // OLIGO_SVG_HPP_
