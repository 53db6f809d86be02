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

#include "triqa/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "triqa/errors.hpp"

namespace triqa {

namespace {

constexpr int kWidth = 640, kHeight = 480;
constexpr int kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
const cv::Scalar kInk(40, 40, 40);
const cv::Scalar kGrid(225, 225, 225);
const cv::Scalar kPalette[] = {{180, 119, 31}, {14, 127, 255}, {44, 160, 44}, {40, 39, 214},
                               {189, 103, 148}, {75, 86, 140}};

void text(cv::Mat& img, const std::string& s, cv::Point at, double scale = 0.45) {
  cv::putText(img, s, at, cv::FONT_HERSHEY_SIMPLEX, scale, kInk, 1, cv::LINE_AA);
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

void save(const cv::Mat& img, const std::filesystem::path& out) {
  bool ok = false;
  try {
    ok = cv::imwrite(out.string(), img);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw DataError("cannot write plot " + out.string());
}

std::pair<double, double> range_of(const std::vector<double>& v) {
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double a = *lo, b = *hi;
  if (a == b) {
    a -= 0.5;
    b += 0.5;
  }
  const double margin = 0.05 * (b - a);
  return {a - margin, b + margin};
}

}  // namespace

void render_scatter(const ScatterPlot& plot, const std::filesystem::path& out) {
  if (plot.x.size() != plot.y.size() || plot.x.empty()) {
    throw UsageError("scatter plot needs equally sized, non-empty series");
  }
  cv::Mat img(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
  const auto [x0, x1] = range_of(plot.x);
  const auto [y0, y1] = range_of(plot.y);
  const int w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + static_cast<int>(std::lround((x - x0) / (x1 - x0) * w)); };
  auto py = [&](double y) { return kTop + h - static_cast<int>(std::lround((y - y0) / (y1 - y0) * h)); };
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    cv::line(img, {px(fx), kTop}, {px(fx), kTop + h}, kGrid);
    cv::line(img, {kLeft, py(fy)}, {kLeft + w, py(fy)}, kGrid);
    text(img, tick(fx), {px(fx) - 15, kTop + h + 18}, 0.4);
    text(img, tick(fy), {5, py(fy) + 4}, 0.4);
  }
  cv::rectangle(img, {kLeft, kTop}, {kLeft + w, kTop + h}, kInk);
  for (size_t i = 0; i < plot.x.size(); ++i) {
    cv::circle(img, {px(plot.x[i]), py(plot.y[i])}, 3, kPalette[0], cv::FILLED, cv::LINE_AA);
  }
  text(img, plot.title, {kLeft, 25}, 0.55);
  text(img, plot.x_label, {kLeft + w / 2 - 20, kHeight - 20});
  text(img, plot.y_label, {5, kTop - 8});
  save(img, out);
}

void render_bars(const BarChart& chart, const std::filesystem::path& out) {
  if (chart.groups.size() != chart.values.size() || chart.groups.empty() || chart.series.empty()) {
    throw UsageError("bar chart needs one value row per group");
  }
  cv::Mat img(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
  const int w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
  double lo = 0.0;
  for (const auto& row : chart.values) {
    if (row.size() != chart.series.size()) throw UsageError("bar chart row width mismatch");
    for (double v : row) lo = std::min(lo, v);
  }
  lo = std::max(lo, -1.0);
  auto py = [&](double v) {
    return kTop + h - static_cast<int>(std::lround((std::clamp(v, lo, 1.0) - lo) / (1.0 - lo) * h));
  };
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (1.0 - lo) * i / 4.0;
    cv::line(img, {kLeft, py(v)}, {kLeft + w, py(v)}, kGrid);
    text(img, tick(v), {5, py(v) + 4}, 0.4);
  }
  const int group_w = w / static_cast<int>(chart.groups.size());
  const int bar_w = std::max(2, (group_w - 20) / static_cast<int>(chart.series.size()));
  for (size_t g = 0; g < chart.groups.size(); ++g) {
    const int gx = kLeft + static_cast<int>(g) * group_w + 10;
    for (size_t s = 0; s < chart.series.size(); ++s) {
      const int x = gx + static_cast<int>(s) * bar_w;
      cv::rectangle(img, {x, py(chart.values[g][s])}, {x + bar_w - 2, py(std::max(lo, 0.0))},
                    kPalette[s % 6], cv::FILLED);
    }
    text(img, chart.groups[g], {gx, kTop + h + 18}, 0.4);
  }
  cv::rectangle(img, {kLeft, kTop}, {kLeft + w, kTop + h}, kInk);
  text(img, chart.title, {kLeft, 25}, 0.55);
  for (size_t s = 0; s < chart.series.size(); ++s) {
    const int x = kLeft + static_cast<int>(s) * 140;
    cv::rectangle(img, {x, kHeight - 22}, {x + 12, kHeight - 10}, kPalette[s % 6], cv::FILLED);
    text(img, chart.series[s], {x + 16, kHeight - 11}, 0.4);
  }
  save(img, out);
}

}  // namespace triqa
