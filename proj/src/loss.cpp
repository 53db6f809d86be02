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

#include "triqa/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "triqa/errors.hpp"

namespace triqa {

namespace {

void check_dims(size_t a, size_t b) {
  if (a != b) {
    throw UsageError("embedding dimension mismatch: " + std::to_string(a) + " vs " +
                     std::to_string(b));
  }
}

void check_margin(double margin) {
  if (!(margin > 0.0)) throw UsageError("triplet margin must be positive");
}

}  // namespace

double triplet_distance(std::span<const double> x, std::span<const double> y) {
  check_dims(x.size(), y.size());
  double sum = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double triplet_margin_loss(std::span<const double> a, std::span<const double> p,
                           std::span<const double> n, double margin) {
  check_margin(margin);
  check_dims(a.size(), p.size());
  check_dims(a.size(), n.size());
  return std::max(triplet_distance(a, p) - triplet_distance(a, n) + margin, 0.0);
}

TripletLossGrad triplet_margin_loss_grad(std::span<const double> a,
                                         std::span<const double> p,
                                         std::span<const double> n, double margin) {
  check_margin(margin);
  check_dims(a.size(), p.size());
  check_dims(a.size(), n.size());
  TripletLossGrad out;
  out.d_ap = triplet_distance(a, p);
  out.d_an = triplet_distance(a, n);
  const double hinge = out.d_ap - out.d_an + margin;
  out.loss = std::max(hinge, 0.0);
  out.grad_a.assign(a.size(), 0.0);
  out.grad_p.assign(a.size(), 0.0);
  out.grad_n.assign(a.size(), 0.0);
  if (hinge <= 0.0) return out;
  for (size_t i = 0; i < a.size(); ++i) {
    // d/da ||a - p|| = (a - p) / ||a - p||
    const double gp = out.d_ap > 0.0 ? (a[i] - p[i]) / out.d_ap : 0.0;
    const double gn = out.d_an > 0.0 ? (a[i] - n[i]) / out.d_an : 0.0;
    out.grad_a[i] = gp - gn;
    out.grad_p[i] = -gp;
    out.grad_n[i] = gn;
  }
  return out;
}

}  // namespace triqa
