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

#include "triqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "triqa/errors.hpp"

namespace triqa {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw UsageError("correlation inputs differ in length: " + std::to_string(x.size()) +
                     " vs " + std::to_string(y.size()));
  }
  if (x.size() < 2) throw UsageError("correlation needs at least two samples");
  for (size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw NumericalError("correlation input is not finite");
    }
  }
}

double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

double plcc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw NumericalError("correlation is undefined for a constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<size_t> order(x.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i + 1;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    // Positions i..j-1 share ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double srcc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return plcc(rx, ry);
}

double Logistic4::operator()(double x) const {
  const double scale = std::max(std::abs(beta[3]), 1e-12);
  return (beta[0] - beta[1]) / (1.0 + std::exp(-(x - beta[2]) / scale)) + beta[1];
}

Logistic4 fit_logistic4(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  Logistic4 f;
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  const double mx = mean(x);
  double sx = 0.0;
  for (double v : x) sx += (v - mx) * (v - mx);
  sx = std::sqrt(sx / static_cast<double>(x.size()));
  if (sx == 0.0) throw NumericalError("logistic fit needs non-constant predictions");
  f.beta = {*ymax, *ymin, mx, sx};

  const auto n = static_cast<Eigen::Index>(x.size());
  auto residuals = [&](const Logistic4& g) {
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r(i) = g(x[i]) - y[i];
    return r;
  };
  Eigen::VectorXd r = residuals(f);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::MatrixXd jac(n, 4);
    const double s = std::max(std::abs(f.beta[3]), 1e-12);
    const double sign = f.beta[3] < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z = (x[i] - f.beta[2]) / s;
      const double sig = 1.0 / (1.0 + std::exp(-z));
      const double amp = f.beta[0] - f.beta[1];
      const double dsig = sig * (1.0 - sig);
      jac(i, 0) = sig;
      jac(i, 1) = 1.0 - sig;
      jac(i, 2) = -amp * dsig / s;
      jac(i, 3) = -amp * dsig * z / s * sign;
    }
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    const Eigen::Vector4d jtr = jac.transpose() * r;
    bool improved = false;
    while (lambda < 1e12) {
      Eigen::Matrix4d a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::Vector4d step = a.ldlt().solve(-jtr);
      Logistic4 trial = f;
      for (int k = 0; k < 4; ++k) trial.beta[k] += step(k);
      const Eigen::VectorXd rt = residuals(trial);
      const double ct = rt.squaredNorm();
      if (std::isfinite(ct) && ct < cost) {
        const double gain = cost - ct;
        f = trial;
        r = rt;
        cost = ct;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = gain > 1e-15 * std::max(cost, 1e-300);
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return f;
}

double plcc_logistic(std::span<const double> x, std::span<const double> y) {
  const Logistic4 f = fit_logistic4(x, y);
  std::vector<double> mapped(x.size());
  for (size_t i = 0; i < x.size(); ++i) mapped[i] = f(x[i]);
  return plcc(mapped, y);
}

double median(std::span<const double> x) {
  if (x.empty()) throw UsageError("median of an empty sequence");
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  const size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double stddev(std::span<const double> x) {
  if (x.empty()) throw UsageError("standard deviation of an empty sequence");
  if (x.size() == 1) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace triqa
