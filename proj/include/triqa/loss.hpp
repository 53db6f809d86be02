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

#include <span>
#include <vector>

namespace triqa {

/// Euclidean distance. Throws UsageError on a dimension mismatch.
double triplet_distance(std::span<const double> x, std::span<const double> y);

/// max{d(a, p) - d(a, n) + margin, 0}. Throws UsageError on a dimension
/// mismatch or a non-positive margin.
double triplet_margin_loss(std::span<const double> a, std::span<const double> p,
                           std::span<const double> n, double margin);

struct TripletLossGrad {
  double loss = 0.0;
  double d_ap = 0.0;
  double d_an = 0.0;
  std::vector<double> grad_a;
  std::vector<double> grad_p;
  std::vector<double> grad_n;
};

/// Loss and its gradient with respect to all three embeddings. The
/// subgradient is zero at the hinge kink (loss argument exactly 0) and for a
/// distance term whose two points coincide.
TripletLossGrad triplet_margin_loss_grad(std::span<const double> a,
                                         std::span<const double> p,
                                         std::span<const double> n, double margin);

}  // namespace triqa
