// Copyright 2026 The TRIQA Authors
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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace triqa {

struct ScatterPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
};

struct BarChart {
  std::string title;
  std::vector<std::string> series;           // legend entries
  std::vector<std::string> groups;           // x-axis categories
  std::vector<std::vector<double>> values;   // [group][series], in [0, 1]
};

/// PNG renderers (640 x 480). Deterministic for identical input.
void render_scatter(const ScatterPlot& plot, const std::filesystem::path& out);
void render_bars(const BarChart& chart, const std::filesystem::path& out);

}  // namespace triqa
