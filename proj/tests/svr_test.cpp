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


#include "triqa/svr.hpp"

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "triqa/errors.hpp"
#include "triqa/metrics.hpp"

namespace triqa {
namespace {

struct Linear {
  Eigen::MatrixXd x;
  std::vector<double> y;
  Eigen::VectorXd w;
  double b = 0.0;
};

Linear linear_data(int n, int d, uint64_t seed, double noise = 0.0) {
  Rng rng(seed);
  Linear out;
  out.x = Eigen::MatrixXd(n, d);
  out.w = Eigen::VectorXd(d);
  for (int j = 0; j < d; ++j) out.w(j) = rng.normal();
  out.b = 50.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) out.x(i, j) = rng.normal() * (1.0 + j);
    out.y.push_back(out.x.row(i).dot(out.w) + out.b + noise * rng.normal());
  }
  return out;
}

TEST(Fit, RecoversLinearGroundTruth) {
  const Linear data = linear_data(500, 20, 1);
  SplitProtocol protocol;
  protocol.seed = 3;
  const auto result = run_protocol(data.x, data.y, protocol);
  ASSERT_EQ(result.iterations.size(), 10u);
  EXPECT_GE(result.median_srcc, 0.99);
  std::vector<double> s;
  for (const auto& it : result.iterations) {
    EXPECT_GE(it.srcc, 0.99);
    s.push_back(it.srcc);
  }
  EXPECT_EQ(result.median_srcc, median(s));
  EXPECT_EQ(result.std_srcc, stddev(s));
}

TEST(Fit, ConstantTargetIsAnError) {
  const Linear data = linear_data(30, 3, 2);
  const std::vector<double> flat(30, 4.0);
  EXPECT_THROW(fit(data.x, flat), NumericalError);
}

TEST(Fit, InputValidation) {
  const Linear data = linear_data(30, 3, 2);
  EXPECT_THROW(fit(data.x.topRows(4), std::vector<double>(data.y.begin(), data.y.begin() + 4)),
               DataError);
  EXPECT_THROW(fit(data.x, std::vector<double>(data.y.begin(), data.y.end() - 1)), DataError);
  Eigen::MatrixXd bad = data.x;
  bad(3, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(fit(bad, data.y), DataError);
  SvrGrid empty;
  empty.c.clear();
  EXPECT_THROW(fit(data.x, data.y, empty), UsageError);
  EXPECT_THROW(run_protocol(data.x.topRows(9), std::vector<double>(data.y.begin(), data.y.begin() + 9), {}),
               DataError);
}

TEST(Fit, DuplicatedRowsGiveTheSameModel) {
  const Linear data = linear_data(40, 4, 5, 2.0);
  Eigen::MatrixXd x2(80, 4);
  x2 << data.x, data.x;
  std::vector<double> y2 = data.y;
  y2.insert(y2.end(), data.y.begin(), data.y.end());
  const auto a = fit(data.x, data.y);
  const auto b = fit(x2, y2);
  EXPECT_EQ(a.c, b.c);
  EXPECT_EQ(a.epsilon, b.epsilon);
  const auto pa = predict(a, data.x), pb = predict(b, data.x);
  for (size_t i = 0; i < pa.size(); ++i) EXPECT_NEAR(pa[i], pb[i], 1e-6);
}

TEST(Predict, ZeroWeightModelReturnsBias) {
  RegressionModel m;
  m.weights = Eigen::VectorXd::Zero(3);
  m.bias = 42.5;
  m.standardizer.mean = Eigen::VectorXd::Zero(3);
  m.standardizer.scale = Eigen::VectorXd::Ones(3);
  Rng rng(1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(predict(m, testing::random_vector(rng, 3, 100.0)), 42.5);
  EXPECT_THROW(predict(m, std::vector<double>(4)), UsageError);
}

TEST(Predict, TrainingPointsInsideTheEpsilonTube) {
  const Linear data = linear_data(100, 5, 7);
  const Standardizer s = Standardizer::fit(data.x);
  const double eps = 0.5;
  // C multiplies the mean hinge loss, so a hard tube needs a large C.
  const RegressionModel m = fit_linear_svr(s.apply(data.x), data.y, 1e4, eps);
  const Eigen::VectorXd pred = (s.apply(data.x) * m.weights).array() + m.bias;
  for (int i = 0; i < 100; ++i) EXPECT_LE(std::abs(pred(i) - data.y[i]), eps + 1e-6) << i;
}

TEST(Predict, OneByOneEqualsBatch) {
  const Linear data = linear_data(60, 6, 8, 1.0);
  const auto m = fit(data.x, data.y);
  const auto batch = predict(m, data.x);
  for (int i = 0; i < 60; ++i) {
    std::vector<double> row(6);
    for (int j = 0; j < 6; ++j) row[j] = data.x(i, j);
    EXPECT_EQ(predict(m, row), batch[i]);
  }
}

TEST(Protocol, SingleIterationMedianIsTheRun) {
  const Linear data = linear_data(60, 4, 9, 3.0);
  SplitProtocol p;
  p.iterations = 1;
  const auto r = run_protocol(data.x, data.y, p);
  ASSERT_EQ(r.iterations.size(), 1u);
  EXPECT_EQ(r.median_srcc, r.iterations[0].srcc);
  EXPECT_EQ(r.median_plcc, r.iterations[0].plcc);
  EXPECT_EQ(r.std_srcc, 0.0);
}

TEST(Protocol, LargeFlagForcesOneIteration) {
  const Linear data = linear_data(60, 4, 9, 3.0);
  SplitProtocol p;
  p.large = true;
  EXPECT_EQ(p.effective_iterations(), 1);
  EXPECT_EQ(run_protocol(data.x, data.y, p).iterations.size(), 1u);
}

TEST(Protocol, SplitsAreEightyTwentyAndDisjoint) {
  SplitProtocol p;
  p.seed = 4;
  for (int it = 0; it < 10; ++it) {
    const auto [train, test] = protocol_split(101, p, it);
    EXPECT_EQ(train.size(), 81u);
    EXPECT_EQ(test.size(), 20u);
    std::set<int64_t> all(train.begin(), train.end());
    all.insert(test.begin(), test.end());
    EXPECT_EQ(all.size(), 101u);
  }
  EXPECT_NE(protocol_split(101, p, 0).second, protocol_split(101, p, 1).second);
}

TEST(Protocol, DeterministicUnderSeed) {
  const Linear data = linear_data(50, 4, 10, 3.0);
  SplitProtocol p;
  p.seed = 77;
  p.iterations = 3;
  p.logistic_fit = true;
  const auto a = run_protocol(data.x, data.y, p), b = run_protocol(data.x, data.y, p);
  ASSERT_EQ(a.iterations.size(), b.iterations.size());
  for (size_t i = 0; i < a.iterations.size(); ++i) {
    EXPECT_EQ(a.iterations[i].test_rows, b.iterations[i].test_rows);
    EXPECT_EQ(a.iterations[i].predictions, b.iterations[i].predictions);
    EXPECT_EQ(a.iterations[i].srcc, b.iterations[i].srcc);
    EXPECT_EQ(a.iterations[i].plcc_logistic, b.iterations[i].plcc_logistic);
  }
  EXPECT_TRUE(a.median_plcc_logistic.has_value());
}

// Standardization, cross-validation and the final fit only ever see rows
// from the training split of their iteration.
TEST(Protocol, TestRowsNeverReachTheFit) {
  const Linear data = linear_data(50, 3, 11, 2.0);
  SplitProtocol p;
  p.seed = 5;
  p.iterations = 4;
  int iteration = 0;
  std::set<int64_t> test;
  int violations = 0, calls = 0;
  auto check = [&](std::span<const int64_t> rows) {
    ++calls;
    for (int64_t r : rows) violations += test.contains(r);
  };
  auto refresh = [&] {
    const auto split = protocol_split(50, p, iteration);
    test = std::set<int64_t>(split.second.begin(), split.second.end());
  };
  refresh();
  FitObserver obs;
  obs.on_cv_fold = [&](std::span<const int64_t> tr, std::span<const int64_t> va) {
    check(tr);
    check(va);
  };
  obs.on_standardize = check;
  obs.on_final_fit = [&](std::span<const int64_t> rows) {
    check(rows);
    ++iteration;
    refresh();
  };
  run_protocol(data.x, data.y, p, {}, &obs);
  EXPECT_EQ(iteration, 4);
  EXPECT_EQ(calls, 4 * (2 * 5 + 2));
  EXPECT_EQ(violations, 0);
}

TEST(Protocol, InvalidSettingsRejected) {
  SplitProtocol p;
  p.train_fraction = 1.0;
  EXPECT_THROW(p.validate(), UsageError);
  p.train_fraction = 0.8;
  p.iterations = 0;
  EXPECT_THROW(p.validate(), UsageError);
}

TEST(ModelFile, RoundTrip) {
  testing::TempDir dir("model");
  const Linear data = linear_data(40, 3, 12, 1.0);
  RegressionModel m = fit(data.x, data.y);
  m.seed = 9;
  FeatureSource src;
  src.content_dim = 1;
  src.quality_dim = 2;
  src.checkpoint_fingerprint = "abc";
  m.source = src;
  save_model(m, dir / "m.json");
  const RegressionModel back = load_model(dir / "m.json");
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.bias, m.bias);
  EXPECT_EQ(back.c, m.c);
  EXPECT_EQ(back.seed, 9u);
  ASSERT_TRUE(back.source.has_value());
  EXPECT_EQ(*back.source, src);
  EXPECT_EQ(predict(back, data.x), predict(m, data.x));
  std::ofstream(dir / "bad.json") << "{\"format\":\"other\"}";
  EXPECT_THROW(load_model(dir / "bad.json"), DataError);
}

}  // namespace
}  // namespace triqa
