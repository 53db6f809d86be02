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

#include <array>
#include <span>
#include <vector>

namespace triqa {

/// Pearson correlation. Throws UsageError on a length mismatch or fewer than
/// two samples, NumericalError when either input is constant.
double plcc(std::span<const double> x, std::span<const double> y);

/// Fractional ranks starting at 1; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> x);

/// Spearman correlation: Pearson correlation of average ranks.
double srcc(std::span<const double> x, std::span<const double> y);

/// f(x) = (b1 - b2) / (1 + exp(-(x - b3) / |b4|)) + b2
struct Logistic4 {
  std::array<double, 4> beta{1.0, 0.0, 0.0, 1.0};

  double operator()(double x) const;
};

/// Least-squares fit of `Logistic4` mapping predictions `x` onto targets `y`
/// (Levenberg-Marquardt from a data-driven start).
Logistic4 fit_logistic4(std::span<const double> x, std::span<const double> y);

/// PLCC after the logistic remapping of `x` onto `y`.
double plcc_logistic(std::span<const double> x, std::span<const double> y);

/// Exact median (mean of the two middle values for even sizes). Throws
/// UsageError on empty input.
double median(std::span<const double> x);

/// Sample standard deviation (n - 1); 0 for a single value.
double stddev(std::span<const double> x);

}  // namespace triqa
