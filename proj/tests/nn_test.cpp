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


#include "triqa/nn.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "triqa/errors.hpp"
#include "triqa/seeding.hpp"

namespace triqa::nn {
namespace {

BackboneSpec tiny_spec() {
  return {{{3, 4, 3, 1, 1}, {4, 6, 3, 2, 1}}, 5};
}

Tensor3 random_input(int h, int w, uint64_t seed) {
  Rng rng(seed);
  Tensor3 t{3, h, w, std::vector<float>(3 * h * w)};
  for (auto& v : t.data) v = static_cast<float>(rng.normal());
  return t;
}

// Scalar objective sum_i w_i * embedding_i, evaluated in double.
double objective(const Network& net, const Tensor3& x, const std::vector<float>& w) {
  Tape tape;
  net.forward(x, tape);
  double s = 0.0;
  for (size_t i = 0; i < w.size(); ++i) s += double(w[i]) * tape.embedding[i];
  return s;
}

TEST(Network, BackwardMatchesFiniteDifferences) {
  Network net(tiny_spec(), 3);
  const Tensor3 x = random_input(9, 8, 4);
  const std::vector<float> w{0.3f, -1.2f, 0.7f, 0.05f, -0.4f};
  Tape tape;
  net.forward(x, tape);
  net.zero_grad();
  net.backward(tape, w);

  Rng rng(5);
  int checked = 0, good = 0;
  for (auto& p : net.params()) {
    for (int k = 0; k < 6; ++k) {
      const size_t j = rng.below(p.size());
      const float saved = p.value[j];
      const float h = 1e-3f;
      p.value[j] = saved + h;
      const double up = objective(net, x, w);
      p.value[j] = saved - h;
      const double down = objective(net, x, w);
      p.value[j] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = p.grad[j];
      ++checked;
      if (std::abs(fd - an) <= 2e-3 + 2e-2 * std::abs(fd)) ++good;
    }
  }
  // A perturbation occasionally crosses a ReLU kink; allow one such case.
  EXPECT_GE(good, checked - 1) << good << "/" << checked;
}

TEST(Network, FeaturesMatchForwardPooled) {
  Network net(tiny_spec(), 3);
  const Tensor3 x = random_input(12, 10, 6);
  Tape tape;
  net.forward(x, tape);
  EXPECT_EQ(net.features(x), tape.pooled);
  EXPECT_EQ(tape.pooled.size(), 6u);
  EXPECT_EQ(tape.embedding.size(), 5u);
}

TEST(Network, SeededInitIsDeterministic) {
  EXPECT_EQ(Network(tiny_spec(), 8).parameter_bytes(), Network(tiny_spec(), 8).parameter_bytes());
  EXPECT_NE(Network(tiny_spec(), 8).parameter_bytes(), Network(tiny_spec(), 9).parameter_bytes());
}

TEST(Network, ParameterBytesRoundTrip) {
  Network a(tiny_spec(), 1), b(tiny_spec(), 2);
  b.load_parameter_bytes(a.parameter_bytes());
  const Tensor3 x = random_input(8, 8, 1);
  EXPECT_EQ(a.features(x), b.features(x));
  EXPECT_THROW(b.load_parameter_bytes("abc"), DataError);
}

TEST(Network, ParameterCountMatchesSpec) {
  const auto spec = tiny_spec();
  size_t n = 0;
  for (const auto& p : Network(spec, 1).params()) n += p.size();
  EXPECT_EQ(n, spec.parameter_count());
  EXPECT_EQ(n, size_t(4 * 27 + 4 + 6 * 36 + 6 + 5 * 6 + 5));
}

TEST(Network, InputBelowMinimumRejected) {
  const Network net(tiny_spec(), 1);
  EXPECT_EQ(tiny_spec().total_stride(), 2);
  EXPECT_THROW(net.features(random_input(1, 8, 1)), DataError);
  Tensor3 gray{1, 8, 8, std::vector<float>(64)};
  EXPECT_THROW(net.features(gray), UsageError);
}

TEST(Network, ChannelMismatchRejected) {
  EXPECT_THROW(Network(BackboneSpec{{{3, 4, 3, 1, 1}, {5, 6, 3, 1, 1}}, 0}, 1), ConfigError);
}

TEST(Adam, MatchesScalarReference) {
  std::vector<Param> params{{"w", {3}, {0.5f, -1.0f, 2.0f}, {0, 0, 0}}};
  Adam opt(params, {});
  std::vector<double> w{0.5, -1.0, 2.0}, m(3), v(3);
  Rng rng(2);
  for (int t = 1; t <= 25; ++t) {
    for (int j = 0; j < 3; ++j) {
      const double g = rng.normal();
      params[0].grad[j] = static_cast<float>(g);
      const double gs = double(params[0].grad[j]) * 0.5;
      m[j] = 0.9 * m[j] + 0.1 * gs;
      v[j] = 0.999 * v[j] + 0.001 * gs * gs;
      const double mh = m[j] / (1 - std::pow(0.9, t));
      const double vh = v[j] / (1 - std::pow(0.999, t));
      w[j] -= 5e-4 * mh / (std::sqrt(vh) + 1e-8);
    }
    opt.step(params, 5e-4, 0.5);
    for (int j = 0; j < 3; ++j) ASSERT_NEAR(params[0].value[j], w[j], 1e-5) << t;
  }
  EXPECT_EQ(opt.steps(), 25);
}

TEST(CosineLr, EndpointsAndMidpoint) {
  EXPECT_DOUBLE_EQ(cosine_lr(5e-4, 0, 100), 5e-4);
  EXPECT_NEAR(cosine_lr(5e-4, 50, 100), 2.5e-4, 1e-15);
  EXPECT_NEAR(cosine_lr(5e-4, 100, 100), 0.0, 1e-18);
  double prev = 1.0;
  for (int s = 0; s <= 100; ++s) {
    const double lr = cosine_lr(1.0, s, 100);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

}  // namespace
}  // namespace triqa::nn
