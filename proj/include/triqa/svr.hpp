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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "triqa/features.hpp"

namespace triqa {

/// Hyperparameter grid searched by k-fold cross-validation on the training
/// rows. `c` is the regularization strength of the mean epsilon-insensitive
/// loss, so duplicating every row leaves the optimum unchanged.
struct SvrGrid {
  std::vector<double> c{1e-2, 1e-1, 1.0, 10.0, 100.0};
  std::vector<double> epsilon{0.1, 0.5, 1.0};
  int folds = 5;

  void validate() const;  // throws UsageError
};

/// Per-dimension z-score statistics. Dimensions with zero spread keep a
/// scale of 1.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

struct RegressionModel {
  Eigen::VectorXd weights;  // in standardized feature space
  double bias = 0.0;
  Standardizer standardizer;
  double c = 0.0;
  double epsilon = 0.0;
  /// Mean absolute cross-validation error of the selected grid point.
  double cv_mae = 0.0;
  std::optional<FeatureSource> source;
  uint64_t seed = 0;

  int dim() const { return static_cast<int>(weights.size()); }
};

/// Instrumentation hooks. Every callback receives the caller's row ids of
/// the rows it is about to touch, which lets tests prove that test rows never
/// reach standardization or the grid search.
struct FitObserver {
  std::function<void(std::span<const int64_t> rows)> on_standardize;
  std::function<void(std::span<const int64_t> train, std::span<const int64_t> validation)>
      on_cv_fold;
  std::function<void(std::span<const int64_t> rows)> on_final_fit;
};

/// Linear epsilon-SVR on fixed (standardized) inputs, solved by dual
/// coordinate descent. `y` is centred inside; the returned bias includes the
/// mean.
RegressionModel fit_linear_svr(const Eigen::MatrixXd& x, std::span<const double> y, double c,
                               double epsilon);

/// Standardizes, grid-searches by k-fold CV minimizing MAE (ties keep the
/// earlier grid point) and refits on all rows. Folds are assigned by row
/// content, so identical rows always share a fold. `row_ids` defaults to
/// 0..n-1. Throws DataError on mismatched lengths, non-finite values or fewer
/// rows than folds, NumericalError on a constant target.
RegressionModel fit(const Eigen::MatrixXd& x, std::span<const double> y,
                    const SvrGrid& grid = {}, const FitObserver* observer = nullptr,
                    std::span<const int64_t> row_ids = {});

/// Throws UsageError on a dimension mismatch.
double predict(const RegressionModel& model, std::span<const double> features);
std::vector<double> predict(const RegressionModel& model, const Eigen::MatrixXd& x);

struct SplitProtocol {
  double train_fraction = 0.8;
  int iterations = 10;
  uint64_t seed = 0;
  /// Very large corpora are evaluated over a single split.
  bool large = false;
  bool logistic_fit = false;

  void validate() const;  // throws UsageError
  int effective_iterations() const { return large ? 1 : iterations; }
};

struct IterationResult {
  double srcc = 0.0;
  double plcc = 0.0;
  std::optional<double> plcc_logistic;
  double c = 0.0;
  double epsilon = 0.0;
  std::vector<int64_t> test_rows;
  std::vector<double> predictions;
};

struct ProtocolResult {
  std::vector<IterationResult> iterations;
  double median_srcc = 0.0;
  double median_plcc = 0.0;
  double std_srcc = 0.0;
  double std_plcc = 0.0;
  std::optional<double> median_plcc_logistic;
};

/// Fresh seeded train/test split per iteration, fit on train, score on test.
/// Needs at least 10 rows.
ProtocolResult run_protocol(const Eigen::MatrixXd& x, std::span<const double> y,
                            const SplitProtocol& protocol, const SvrGrid& grid = {},
                            const FitObserver* observer = nullptr);

/// The train/test row split of iteration `iteration`.
std::pair<std::vector<int64_t>, std::vector<int64_t>> protocol_split(size_t n,
                                                                     const SplitProtocol& protocol,
                                                                     int iteration);

/// JSON model file (weights, standardization, hyperparameters, feature source).
void save_model(const RegressionModel& model, const std::filesystem::path& path);
RegressionModel load_model(const std::filesystem::path& path);

}  // namespace triqa
