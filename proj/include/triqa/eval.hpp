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
#include <optional>
#include <string>
#include <vector>

#include "triqa/dataset.hpp"
#include "triqa/encoder.hpp"
#include "triqa/features.hpp"
#include "triqa/fr.hpp"
#include "triqa/svr.hpp"

namespace triqa {

struct EvalIteration {
  double srcc = 0.0;
  double plcc = 0.0;
  std::optional<double> plcc_logistic;
  /// Selected SVR hyperparameters (absent for full-reference runs).
  std::optional<double> c;
  std::optional<double> epsilon;
  /// Scored test rows, for scatter plots.
  std::vector<double> predictions;
  std::vector<double> targets;
};

struct DatasetResult {
  std::string dataset;
  int64_t rows = 0;
  std::vector<EvalIteration> iterations;
  /// Non-empty when correlations are undefined; iterations are then empty.
  std::string degenerate;

  double median_srcc() const;
  double median_plcc() const;
  double std_srcc() const;
  double std_plcc() const;
  std::optional<double> median_plcc_logistic() const;
};

struct EvalReport {
  static constexpr int kSchemaVersion = 1;

  std::string method = "TRIQA";
  std::string kind = "nr";  // "nr" or "fr"
  SplitProtocol protocol;
  std::string checkpoint_fingerprint;
  std::string content_fingerprint;
  std::string features_fingerprint;
  std::vector<DatasetResult> datasets;

  /// Mean of the per-dataset medians over non-degenerate datasets.
  std::optional<double> average_srcc() const;
  std::optional<double> average_plcc() const;

  /// Throws UsageError for a report with no datasets or a non-degenerate
  /// dataset without iterations.
  void validate() const;
};

/// Runs the split protocol on precomputed fused features.
DatasetResult evaluate_features(const FeatureMatrix& features, const std::vector<double>& mos,
                                const std::string& dataset, const SplitProtocol& protocol,
                                const SvrGrid& grid = {}, const FitObserver* observer = nullptr);

/// Extract, fuse, fit and score one MOS table.
EvalReport evaluate_nr(const DatasetTable& table, const Checkpoint& ckpt,
                       const ContentEncoder& content, const SplitProtocol& protocol,
                       const SvrGrid& grid = {}, QualityScales scales = QualityScales::kBoth);

/// Full-reference report over several tables (one value per dataset).
EvalReport evaluate_fr_report(const std::vector<DatasetTable>& tables, const Checkpoint& ckpt,
                              const FROptions& options = {});

/// 100 * (with - without) / without. Throws NumericalError when
/// `without` is zero.
double percent_delta(double with, double without);

struct AblationRow {
  std::string dataset;
  double srcc_with = 0.0;
  double srcc_without = 0.0;
  double srcc_delta = 0.0;  // percent
  double plcc_with = 0.0;
  double plcc_without = 0.0;
  double plcc_delta = 0.0;  // percent
};

struct AblationReport {
  EvalReport with;
  EvalReport without;
  std::vector<AblationRow> rows;
};

/// Pairs two reports dataset by dataset. Throws UsageError when protocols or
/// dataset lists differ.
AblationReport compare_reports(const EvalReport& with, const EvalReport& without);

/// Evaluates `table` under two checkpoints with one protocol and compares.
AblationReport run_ablation(const DatasetTable& table, const Checkpoint& ckpt_with,
                            const Checkpoint& ckpt_without, const ContentEncoder& content,
                            const SplitProtocol& protocol, const SvrGrid& grid = {},
                            QualityScales scales = QualityScales::kBoth);

enum class ReportFormat { kTableText, kCsv, kJson, kPlots };

ReportFormat parse_report_format(std::string_view name);
std::string_view to_string(ReportFormat format);

/// Writes `report` to `out` (a file, or a directory for plots). Output is
/// deterministic. Throws UsageError on an invalid report, DataError when
/// `out` cannot be written.
void emit_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& out);
void emit_ablation(const AblationReport& report, ReportFormat format,
                   const std::filesystem::path& out);

/// In-memory serializations behind emit_report.
std::string report_to_json(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);
std::string report_to_table(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
EvalReport report_from_csv(const std::string& text);

/// Reads a JSON or CSV report by extension.
EvalReport read_report(const std::filesystem::path& path);

}  // namespace triqa
