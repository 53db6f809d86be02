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
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <string_view>

#include <nlohmann/json.hpp>

#include "triqa/errors.hpp"
#include "triqa/metrics.hpp"
#include "triqa/seeding.hpp"

namespace triqa {

using nlohmann::json;

namespace {

// Stop once the largest dual violation falls below kTolerance times the
// violation at the start (or 1e-12 outright), or when the pass budget is
// spent: kWorkBudget multiply-adds, but never fewer than kMinEpochs passes.
constexpr double kTolerance = 1e-9;
constexpr double kWorkBudget = 2e8;
constexpr int kMinEpochs = 1000;
constexpr int kMaxEpochs = 200000;
constexpr uint64_t kShuffleSeed = 0x5eed5u;

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

std::vector<double> take(std::span<const double> y, const std::vector<size_t>& rows) {
  std::vector<double> out(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) out[i] = y[rows[i]];
  return out;
}

std::vector<int64_t> take_ids(std::span<const int64_t> ids, const std::vector<size_t>& rows) {
  std::vector<int64_t> out(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) out[i] = ids[rows[i]];
  return out;
}

uint64_t row_hash(const Eigen::MatrixXd& x, std::span<const double> y, Eigen::Index r) {
  std::string bytes;
  bytes.reserve(static_cast<size_t>(x.cols() + 1) * sizeof(double));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double v = x(r, c);
    bytes.append(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  const double t = y[static_cast<size_t>(r)];
  bytes.append(reinterpret_cast<const char*>(&t), sizeof(t));
  return stable_hash(bytes);
}

// Identical rows hash alike; distinct rows are ordered by hash and dealt
// round-robin into folds.
std::vector<int> assign_folds(const Eigen::MatrixXd& x, std::span<const double> y, int folds) {
  const auto n = static_cast<size_t>(x.rows());
  std::vector<uint64_t> hashes(n);
  for (size_t i = 0; i < n; ++i) hashes[i] = row_hash(x, y, static_cast<Eigen::Index>(i));
  std::vector<uint64_t> unique = hashes;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  if (unique.size() < static_cast<size_t>(folds)) {
    throw DataError("only " + std::to_string(unique.size()) + " distinct rows for " +
                    std::to_string(folds) + "-fold cross-validation");
  }
  std::map<uint64_t, int> fold_of;
  for (size_t i = 0; i < unique.size(); ++i) fold_of[unique[i]] = static_cast<int>(i % folds);
  std::vector<int> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = fold_of[hashes[i]];
  return out;
}

void check_inputs(const Eigen::MatrixXd& x, std::span<const double> y) {
  if (static_cast<size_t>(x.rows()) != y.size()) {
    throw DataError("feature rows (" + std::to_string(x.rows()) + ") and targets (" +
                    std::to_string(y.size()) + ") differ");
  }
  if (!x.allFinite()) throw DataError("non-finite feature value");
  for (double v : y) {
    if (!std::isfinite(v)) throw DataError("non-finite target value");
  }
}

}  // namespace

void SvrGrid::validate() const {
  if (c.empty() || epsilon.empty()) throw UsageError("SVR grid must not be empty");
  for (double v : c) {
    if (!(v > 0.0)) throw UsageError("SVR C values must be positive");
  }
  for (double v : epsilon) {
    if (!(v >= 0.0)) throw UsageError("SVR epsilon values must be non-negative");
  }
  if (folds < 2) throw UsageError("cross-validation needs at least 2 folds");
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  Standardizer s;
  const auto n = static_cast<double>(x.rows());
  s.mean = x.colwise().sum().transpose() / n;
  s.scale.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var = (x.col(c).array() - s.mean(c)).square().sum() / n;
    s.scale(c) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) {
    throw UsageError("feature dimension " + std::to_string(x.cols()) + " does not match " +
                     std::to_string(mean.size()));
  }
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

RegressionModel fit_linear_svr(const Eigen::MatrixXd& x, std::span<const double> y, double c,
                               double epsilon) {
  check_inputs(x, y);
  const Eigen::Index n = x.rows(), d = x.cols();
  if (n == 0) throw DataError("cannot fit on zero rows");
  const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  const double upper = c / static_cast<double>(n);

  // Dual coordinate descent on
  //   min 0.5 b'Qb - t'b + eps |b|_1,  -U <= b_i <= U,
  // with an augmented constant column carrying the (regularized) bias.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = x.row(i).squaredNorm() + 1.0;

  // Visiting coordinates in a fresh order every pass speeds up convergence
  // on correlated features; the fixed seed keeps fits reproducible.
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(kShuffleSeed);
  double first_violation = -1.0;
  const int max_epochs = static_cast<int>(std::clamp(
      kWorkBudget / (static_cast<double>(n) * static_cast<double>(d + 1)), double{kMinEpochs},
      double{kMaxEpochs}));
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    double violation = 0.0;
    for (size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    for (const Eigen::Index i : order) {
      const double target = y[static_cast<size_t>(i)] - y_mean;
      const double g = x.row(i).dot(w.head(d)) + w(d) - target;
      const double b = beta(i);
      double v;
      if (b >= upper) {
        v = std::max(0.0, g + epsilon);
      } else if (b <= -upper) {
        v = std::max(0.0, -(g - epsilon));
      } else if (b > 0.0) {
        v = std::abs(g + epsilon);
      } else if (b < 0.0) {
        v = std::abs(g - epsilon);
      } else {
        v = std::max({0.0, -(g + epsilon), g - epsilon});
      }
      violation = std::max(violation, v);
      if (v == 0.0) continue;
      // Exact minimizer of the one-variable piecewise quadratic.
      double z;
      const double right = b - (g + epsilon) / q(i);
      const double left = b - (g - epsilon) / q(i);
      if (right > 0.0) {
        z = right;
      } else if (left < 0.0) {
        z = left;
      } else {
        z = 0.0;
      }
      z = std::clamp(z, -upper, upper);
      const double delta = z - b;
      if (delta != 0.0) {
        beta(i) = z;
        w.head(d) += delta * x.row(i).transpose();
        w(d) += delta;
      }
    }
    if (first_violation < 0.0) first_violation = violation;
    if (violation <= std::max(kTolerance * first_violation, 1e-12)) break;
  }

  RegressionModel model;
  model.weights = w.head(d);
  model.bias = y_mean + w(d);
  model.c = c;
  model.epsilon = epsilon;
  model.standardizer.mean = Eigen::VectorXd::Zero(d);
  model.standardizer.scale = Eigen::VectorXd::Ones(d);
  return model;
}

RegressionModel fit(const Eigen::MatrixXd& x, std::span<const double> y, const SvrGrid& grid,
                    const FitObserver* observer, std::span<const int64_t> row_ids) {
  grid.validate();
  check_inputs(x, y);
  const auto n = static_cast<size_t>(x.rows());
  std::vector<int64_t> default_ids;
  if (row_ids.empty()) {
    default_ids.resize(n);
    std::iota(default_ids.begin(), default_ids.end(), int64_t{0});
    row_ids = default_ids;
  }
  if (row_ids.size() != n) throw UsageError("row id count does not match the rows");
  if (n < static_cast<size_t>(grid.folds)) {
    throw DataError("need at least " + std::to_string(grid.folds) + " rows, got " +
                    std::to_string(n));
  }
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
    throw NumericalError("constant target: correlation is undefined");
  }
  const std::vector<int> fold = assign_folds(x, y, grid.folds);

  // Grid search. Standardization is refit inside every fold.
  double best_mae = std::numeric_limits<double>::infinity();
  double best_c = grid.c.front(), best_eps = grid.epsilon.front();
  std::vector<std::vector<size_t>> train_rows(grid.folds), val_rows(grid.folds);
  for (size_t i = 0; i < n; ++i) {
    for (int k = 0; k < grid.folds; ++k) (fold[i] == k ? val_rows : train_rows)[k].push_back(i);
  }
  std::vector<Eigen::MatrixXd> train_x(grid.folds), val_x(grid.folds);
  std::vector<std::vector<double>> train_y(grid.folds), val_y(grid.folds);
  for (int k = 0; k < grid.folds; ++k) {
    if (observer != nullptr && observer->on_cv_fold) {
      const auto tr = take_ids(row_ids, train_rows[k]);
      const auto va = take_ids(row_ids, val_rows[k]);
      observer->on_cv_fold(tr, va);
    }
    const Eigen::MatrixXd raw = take_rows(x, train_rows[k]);
    const Standardizer s = Standardizer::fit(raw);
    train_x[k] = s.apply(raw);
    val_x[k] = s.apply(take_rows(x, val_rows[k]));
    train_y[k] = take(y, train_rows[k]);
    val_y[k] = take(y, val_rows[k]);
  }
  for (double c : grid.c) {
    for (double eps : grid.epsilon) {
      double abs_err = 0.0;
      for (int k = 0; k < grid.folds; ++k) {
        const RegressionModel m = fit_linear_svr(train_x[k], train_y[k], c, eps);
        const Eigen::VectorXd pred = (val_x[k] * m.weights).array() + m.bias;
        for (size_t i = 0; i < val_y[k].size(); ++i) {
          abs_err += std::abs(pred(static_cast<Eigen::Index>(i)) - val_y[k][i]);
        }
      }
      const double mae = abs_err / static_cast<double>(n);
      if (mae < best_mae) {
        best_mae = mae;
        best_c = c;
        best_eps = eps;
      }
    }
  }

  if (observer != nullptr && observer->on_standardize) observer->on_standardize(row_ids);
  const Standardizer s = Standardizer::fit(x);
  if (observer != nullptr && observer->on_final_fit) observer->on_final_fit(row_ids);
  RegressionModel model = fit_linear_svr(s.apply(x), y, best_c, best_eps);
  model.standardizer = s;
  model.cv_mae = best_mae;
  return model;
}

double predict(const RegressionModel& model, std::span<const double> features) {
  if (features.size() != static_cast<size_t>(model.dim())) {
    throw UsageError("feature dimension " + std::to_string(features.size()) +
                     " does not match the model's " + std::to_string(model.dim()));
  }
  double out = model.bias;
  for (size_t j = 0; j < features.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    out += model.weights(k) *
           ((features[j] - model.standardizer.mean(k)) / model.standardizer.scale(k));
  }
  return out;
}

std::vector<double> predict(const RegressionModel& model, const Eigen::MatrixXd& x) {
  std::vector<double> out(static_cast<size_t>(x.rows()));
  std::vector<double> row(static_cast<size_t>(x.cols()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<size_t>(c)] = x(r, c);
    out[static_cast<size_t>(r)] = predict(model, row);
  }
  return out;
}

void SplitProtocol::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must lie in (0, 1)");
  }
  if (iterations < 1) throw UsageError("iterations must be at least 1");
}

std::pair<std::vector<int64_t>, std::vector<int64_t>> protocol_split(
    size_t n, const SplitProtocol& protocol, int iteration) {
  std::vector<int64_t> perm(n);
  std::iota(perm.begin(), perm.end(), int64_t{0});
  Rng rng(derive_seed(derive_seed(protocol.seed, streams::kSplits),
                      static_cast<uint64_t>(iteration)));
  rng.shuffle(perm.begin(), perm.end());
  auto n_train = static_cast<size_t>(std::llround(protocol.train_fraction * static_cast<double>(n)));
  n_train = std::clamp<size_t>(n_train, 1, n - 1);
  std::vector<int64_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<int64_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

ProtocolResult run_protocol(const Eigen::MatrixXd& x, std::span<const double> y,
                            const SplitProtocol& protocol, const SvrGrid& grid,
                            const FitObserver* observer) {
  protocol.validate();
  check_inputs(x, y);
  const auto n = static_cast<size_t>(x.rows());
  if (n < 10) throw DataError("the split protocol needs at least 10 rows, got " + std::to_string(n));

  ProtocolResult result;
  for (int it = 0; it < protocol.effective_iterations(); ++it) {
    const auto [train, test] = protocol_split(n, protocol, it);
    std::vector<size_t> train_idx(train.begin(), train.end());
    std::vector<size_t> test_idx(test.begin(), test.end());
    const RegressionModel model =
        fit(take_rows(x, train_idx), take(y, train_idx), grid, observer, train);
    IterationResult r;
    r.predictions = predict(model, take_rows(x, test_idx));
    const auto truth = take(y, test_idx);
    r.srcc = srcc(r.predictions, truth);
    r.plcc = plcc(r.predictions, truth);
    if (protocol.logistic_fit) r.plcc_logistic = plcc_logistic(r.predictions, truth);
    r.c = model.c;
    r.epsilon = model.epsilon;
    r.test_rows = test;
    result.iterations.push_back(std::move(r));
  }
  std::vector<double> s, p, pl;
  for (const auto& r : result.iterations) {
    s.push_back(r.srcc);
    p.push_back(r.plcc);
    if (r.plcc_logistic) pl.push_back(*r.plcc_logistic);
  }
  result.median_srcc = median(s);
  result.median_plcc = median(p);
  result.std_srcc = stddev(s);
  result.std_plcc = stddev(p);
  if (!pl.empty()) result.median_plcc_logistic = median(pl);
  return result;
}

namespace {

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_model(const RegressionModel& model, const std::filesystem::path& path) {
  json j{{"format", "triqa-svr"},
         {"format_version", 1},
         {"kind", "linear-epsilon-svr"},
         {"dim", model.dim()},
         {"weights", vec_json(model.weights)},
         {"bias", model.bias},
         {"standardize_mean", vec_json(model.standardizer.mean)},
         {"standardize_scale", vec_json(model.standardizer.scale)},
         {"c", model.c},
         {"epsilon", model.epsilon},
         {"cv_mae", model.cv_mae},
         {"seed", model.seed}};
  if (model.source) {
    const auto& s = *model.source;
    j["features"] = {{"content_dim", s.content_dim},
                     {"quality_dim", s.quality_dim},
                     {"quality_scales", to_string(s.scales)},
                     {"checkpoint_fingerprint", s.checkpoint_fingerprint},
                     {"content_fingerprint", s.content_fingerprint},
                     {"content_preset", to_string(s.content_preset)},
                     {"content_seed", s.content_seed}};
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing model " + path.string());
}

RegressionModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model " + path.string());
  RegressionModel m;
  try {
    const json j = json::parse(in);
    if (j.at("format").get<std::string>() != "triqa-svr") {
      throw DataError(path.string() + " is not a triqa regression model");
    }
    m.weights = vec_from(j.at("weights"));
    m.bias = j.at("bias").get<double>();
    m.standardizer.mean = vec_from(j.at("standardize_mean"));
    m.standardizer.scale = vec_from(j.at("standardize_scale"));
    m.c = j.at("c").get<double>();
    m.epsilon = j.at("epsilon").get<double>();
    m.cv_mae = j.at("cv_mae").get<double>();
    m.seed = j.at("seed").get<uint64_t>();
    if (j.contains("features")) {
      const json& f = j.at("features");
      FeatureSource s;
      s.content_dim = f.at("content_dim").get<int>();
      s.quality_dim = f.at("quality_dim").get<int>();
      s.scales = parse_scales(f.at("quality_scales").get<std::string>());
      s.checkpoint_fingerprint = f.at("checkpoint_fingerprint").get<std::string>();
      s.content_fingerprint = f.at("content_fingerprint").get<std::string>();
      s.content_preset = parse_preset(f.at("content_preset").get<std::string>());
      s.content_seed = f.at("content_seed").get<uint64_t>();
      m.source = s;
    }
  } catch (const json::exception& e) {
    throw DataError("malformed model file " + path.string() + ": " + e.what());
  }
  if (m.standardizer.mean.size() != m.weights.size() ||
      m.standardizer.scale.size() != m.weights.size()) {
    throw DataError("model file dimensions are inconsistent");
  }
  return m;
}

}  // namespace triqa
