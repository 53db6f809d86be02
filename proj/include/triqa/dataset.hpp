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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace triqa {

struct DatasetRow {
  std::filesystem::path path;  // the (distorted) image scored
  double mos = 0.0;
  std::optional<std::filesystem::path> reference;
};

/// MOS-labeled image list. One CSV schema covers every corpus:
///
///   path,mos[,reference_path]                  (no-reference tables)
///   reference_path,distorted_path,mos          (full-reference tables)
///
/// Column order is free; a header row is required. Relative paths resolve
/// against the image root given at load time.
struct DatasetTable {
  std::string name;
  std::vector<DatasetRow> rows;
  double mos_min = 0.0;
  double mos_max = 0.0;

  std::vector<double> mos() const;
  std::vector<std::filesystem::path> paths() const;
  /// Row names relative to the image root when possible.
  std::vector<std::string> names() const;
  std::filesystem::path root;
};

/// Throws DataError on a malformed table, a non-finite MOS or an empty table.
DatasetTable read_dataset(const std::filesystem::path& csv,
                          const std::filesystem::path& image_root = {},
                          std::string name = {});

/// Writes the table in the no-reference (or, with references, full-reference)
/// schema with paths relative to `root` where possible.
void write_dataset(const DatasetTable& table, const std::filesystem::path& csv);

/// Splits one CSV record (double-quoted fields allowed).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace triqa
